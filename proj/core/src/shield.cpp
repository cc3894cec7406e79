#include "cbfrl/shield.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace cbfrl {

QFunction q_from_net(const ValueNet& net) {
    return [net](const StateVec& x) {
        const auto values = forward(net, x);
        std::vector<double> q(values.size());
        for (std::size_t a = 0; a < values.size(); ++a) q[a] = values[a].q;
        return q;
    };
}

QFunction q_from_table(const TabularMDP& mdp, std::vector<double> q) {
    if (q.size() != static_cast<std::size_t>(mdp.n_states) * mdp.n_actions) {
        throw std::invalid_argument("q_from_table: table size mismatch");
    }
    const int actions = mdp.n_actions;
    return [q = std::move(q), actions](const StateVec& x) {
        if (x.size() != 1) {
            throw std::invalid_argument("q_from_table: expects a single-component state index");
        }
        const auto s = static_cast<std::size_t>(std::llround(x[0]));
        std::vector<double> out(actions);
        for (int a = 0; a < actions; ++a) out[a] = q[s * actions + a];
        return out;
    };
}

ActionId shielded_action(const QFunction& q, const StateVec& x, ActionId nominal, double R) {
    const std::vector<double> values = q(x);
    if (nominal < 0 || nominal >= static_cast<int>(values.size())) {
        throw std::invalid_argument("shielded_action: nominal action out of range");
    }
    if (values[nominal] >= R) return nominal;
    ActionId best = 0;
    for (int a = 1; a < static_cast<int>(values.size()); ++a) {
        if (values[a] > values[best]) best = a;
    }
    return best;
}

RolloutSummary rollout_shielded(const QFunction& q, int action_count, const ShieldConfig& config,
                                const DynamicsFn& dynamics, const SafetySpec& spec,
                                const Box& reset_box) {
    if (config.episodes <= 0) throw std::invalid_argument("rollout_shielded: episodes must be positive");
    if (config.max_steps <= 0) throw std::invalid_argument("rollout_shielded: max_steps must be positive");

    RolloutSummary summary;
    long total_length = 0;
    int successes = 0;

    for (int ep = 0; ep < config.episodes; ++ep) {
        RngStream reset_rng(config.seed, "shield-reset", static_cast<std::uint64_t>(ep));
        RngStream nominal_rng(config.seed, "shield-nominal", static_cast<std::uint64_t>(ep));

        StateVec state(reset_box.dim());
        for (std::size_t i = 0; i < reset_box.dim(); ++i) {
            state[i] = reset_rng.uniform(reset_box.lo[i], reset_box.hi[i]);
        }

        bool violated = false;
        int length = 0;
        for (int t = 0; t < config.max_steps; ++t) {
            ActionId nominal;
            if (config.script.empty()) {
                nominal = nominal_rng.uniform_int(action_count);
            } else {
                nominal = config.script[t % config.script.size()];
            }
            const ActionId action =
                config.shield_enabled ? shielded_action(q, state, nominal, config.R) : nominal;
            if (action != nominal) ++summary.interventions;

            summary.trace.push_back({ep, t, state, action, action != nominal});
            state = dynamics(state, action);
            ++length;
            if (spec.is_unsafe(state)) {
                violated = true;
                break;
            }
        }
        summary.lengths.push_back(length);
        summary.successes.push_back(!violated);
        total_length += length;
        if (!violated) ++successes;
    }

    summary.mean_length = static_cast<double>(total_length) / config.episodes;
    summary.success_rate = static_cast<double>(successes) / config.episodes;
    return summary;
}

void export_trace(std::ostream& out, const RolloutSummary& summary) {
    if (summary.trace.empty()) throw std::invalid_argument("export_trace: empty trajectories");
    const std::size_t dim = summary.trace.front().state.size();
    out << "episode,t";
    for (std::size_t d = 0; d < dim; ++d) out << ",s" << d;
    out << ",action,shield_intervened\n";
    for (const TraceRow& row : summary.trace) {
        out << row.episode << ',' << row.t;
        for (double v : row.state) out << ',' << v;
        out << ',' << row.action << ',' << (row.intervened ? 1 : 0) << '\n';
    }
}

} // namespace cbfrl
