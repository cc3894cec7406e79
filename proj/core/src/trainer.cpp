#include "cbfrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "cbfrl/barrier.hpp"
#include "cbfrl/cartpole.hpp"
#include "cbfrl/verification.hpp"

namespace cbfrl {

std::string setting_name(Setting s) {
    switch (s) {
        case Setting::kMlp: return "mlp";
        case Setting::kSigmoid: return "sigmoid";
        case Setting::kMlpSup: return "mlp-sup";
        case Setting::kSigmoidSup: return "sigmoid-sup";
        case Setting::kNoExp: return "noexp";
    }
    throw std::invalid_argument("setting_name: bad setting");
}

std::optional<Setting> parse_setting(const std::string& name) {
    if (name == "mlp") return Setting::kMlp;
    if (name == "sigmoid") return Setting::kSigmoid;
    if (name == "mlp-sup") return Setting::kMlpSup;
    if (name == "sigmoid-sup") return Setting::kSigmoidSup;
    if (name == "noexp") return Setting::kNoExp;
    return std::nullopt;
}

TrainConfig setting_config(Setting s) {
    TrainConfig c;
    switch (s) {
        case Setting::kMlp:
            c.arch = Head::kUnbounded;
            c.supervised = false;
            break;
        case Setting::kSigmoid:
            c.arch = Head::kBounded;
            c.supervised = false;
            break;
        case Setting::kMlpSup:
            c.arch = Head::kUnbounded;
            c.supervised = true;
            break;
        case Setting::kSigmoidSup:
            c.arch = Head::kBounded;
            c.supervised = true;
            break;
        case Setting::kNoExp:
            c.arch = Head::kBounded;
            c.supervised = true;
            c.explore = false;
            break;
    }
    return c;
}

Box narrow_reset_box() {
    return Box{{-0.05, -0.05, -0.05, -0.05}, {0.05, 0.05, 0.05, 0.05}};
}

Box diverse_reset_box() {
    return Box{{-2.2, -1.0, -0.18, -1.0}, {2.2, 1.0, 0.18, 1.0}};
}

StateVec reset_state(const TrainConfig& config, RngStream& rng) {
    const Box box = config.explore ? diverse_reset_box() : narrow_reset_box();
    StateVec x(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
}

LossResult td_loss(const ValueNet& net, const ValueNet& target_net,
                   const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
    const int b = static_cast<int>(batch.size());
    const int dim = net.input_dim();
    const int actions = net.action_count();

    Eigen::MatrixXd states(b, dim), next_states(b, dim);
    for (int i = 0; i < b; ++i) {
        for (int d = 0; d < dim; ++d) {
            states(i, d) = batch[i].state[d];
            next_states(i, d) = batch[i].next_state[d];
        }
    }

    const ForwardTrace trace = forward_batch(net, states);
    const ForwardTrace next_trace = forward_batch(target_net, next_states);

    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(b, actions);
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        double target = batch[i].reward;
        if (!batch[i].terminal) {
            target += net.gamma * next_trace.q.row(i).maxCoeff();
        }
        if (!std::isfinite(target)) throw std::runtime_error("td_loss: non-finite target");
        const double diff = trace.q(i, batch[i].action) - target;
        loss += diff * diff;
        upstream(i, batch[i].action) = 2.0 * diff / b;
    }
    return LossResult{loss / b, backward_batch(net, trace, upstream)};
}

LossResult unsafe_supervision_loss(const ValueNet& net, const std::vector<StateVec>& batch,
                                   const SafetySpec& spec) {
    if (batch.empty()) throw std::invalid_argument("unsafe_supervision_loss: empty batch");
    const int b = static_cast<int>(batch.size());
    const int dim = net.input_dim();
    const int actions = net.action_count();

    Eigen::MatrixXd states(b, dim);
    for (int i = 0; i < b; ++i) {
        if (!spec.is_unsafe(batch[i])) {
            throw std::invalid_argument("unsafe_supervision_loss: batch contains a safe state");
        }
        for (int d = 0; d < dim; ++d) states(i, d) = batch[i][d];
    }

    const ForwardTrace trace = forward_batch(net, states);
    const double denom = static_cast<double>(b) * actions;
    const double loss = trace.q.array().square().sum() / denom;
    const Eigen::MatrixXd upstream = (2.0 / denom) * trace.q;
    return LossResult{loss, backward_batch(net, trace, upstream)};
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& history) {
    out << "step,return_mean,td_error,m_valid,m_cov\n";
    out << std::setprecision(17);
    for (const MetricsRecord& rec : history) {
        out << rec.step << ',' << rec.return_mean << ',' << rec.td_error << ',' << rec.m_valid
            << ',' << rec.m_cov << '\n';
    }
}

namespace {

double eps_at(const TrainConfig& config, long step) {
    const double anneal = config.eps.fraction * static_cast<double>(config.total_steps);
    if (anneal <= 0.0) return config.eps.end;
    const double frac = std::min(1.0, static_cast<double>(step) / anneal);
    return config.eps.start + (config.eps.end - config.eps.start) * frac;
}

double greedy_return(const ValueNet& net, const TrainConfig& config, const SafetySpec& spec,
                     const DynamicsFn& dynamics, RngStream& rng) {
    // Return is evaluated from the benchmark's own narrow reset box so the
    // number is comparable across exploration settings.
    const Box box = narrow_reset_box();
    double total = 0.0;
    for (int ep = 0; ep < config.eval_rollouts; ++ep) {
        StateVec start(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i) start[i] = rng.uniform(box.lo[i], box.hi[i]);
        SafetyEpisode episode(dynamics, spec, config.step_cap);
        episode.reset(start);
        double ret = 0.0;
        while (!episode.finished()) {
            ret += episode.step(greedy_action(net, episode.state())).reward;
        }
        total += ret;
    }
    return total / config.eval_rollouts;
}

MetricsRecord evaluate(const ValueNet& net, const TrainConfig& config, const SafetySpec& spec,
                       const DynamicsFn& dynamics, long step, RngStream& metrics_rng) {
    MetricsRecord rec;
    rec.step = step;
    rec.return_mean = greedy_return(net, config, spec, dynamics, metrics_rng);

    VerificationConfig vcfg;
    vcfg.n_samples = config.eval_samples;
    vcfg.alpha = config.eval_alpha;
    vcfg.seed = metrics_rng.next_u64();
    rec.td_error = td_error_metric(net, vcfg, spec, dynamics);

    const BarrierMode mode =
        net.head == Head::kBounded ? BarrierMode::kRawLogit : BarrierMode::kValueMinusR;
    const BarrierFn barrier = make_barrier(net, mode, config.eval_R);
    rec.m_valid = m_valid(barrier, vcfg, spec, dynamics, net.action_count());
    rec.m_cov = m_cov(barrier, vcfg, spec);
    return rec;
}

} // namespace

TrainResult train(const TrainConfig& config) {
    if (config.total_steps <= 0) throw std::invalid_argument("train: total_steps must be positive");
    if (config.gamma < 0.0 || config.gamma >= 1.0) {
        throw std::invalid_argument("train: gamma must be in [0, 1)");
    }
    if (config.supervision_weight < 0.0) {
        throw std::invalid_argument("train: supervision_weight must be nonnegative");
    }

    const SafetySpec spec = cartpole_safety_spec();
    const DynamicsFn dynamics = cartpole_dynamics();

    RngStream env_rng(config.seed, "env");
    RngStream init_rng(config.seed, "net-init");
    RngStream replay_rng(config.seed, "replay");
    RngStream unsafe_rng(config.seed, "unsafe-sampler");
    RngStream metrics_rng(config.seed, "metrics");

    std::vector<int> sizes;
    sizes.push_back(kCartPoleStateDim);
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(kCartPoleActions);

    TrainResult result;
    result.net = make_value_net(sizes, config.arch, config.gamma, init_rng);
    ValueNet target = result.net;
    ValueNet last_good = result.net;
    AdamState adam = make_adam_state(result.net);
    ReplayBuffer replay(config.buffer_capacity);

    SafetyEpisode episode(dynamics, spec, config.step_cap);
    episode.reset(reset_state(config, env_rng));

    std::vector<Transition> batch;
    std::vector<StateVec> unsafe_batch;

    for (long step = 1; step <= config.total_steps; ++step) {
        if (episode.finished()) episode.reset(reset_state(config, env_rng));

        ActionId action;
        if (env_rng.bernoulli(eps_at(config, step))) {
            action = env_rng.uniform_int(kCartPoleActions);
        } else {
            action = greedy_action(result.net, episode.state());
        }
        replay.push(episode.step(action));

        if (step > config.warmup_steps && replay.size() >= config.batch_size) {
            batch.clear();
            for (int i = 0; i < config.batch_size; ++i) batch.push_back(replay.sample(replay_rng));

            bool ok = true;
            try {
                LossResult td = td_loss(result.net, target, batch);
                double loss = td.loss;
                if (config.supervised) {
                    unsafe_batch.clear();
                    for (int i = 0; i < config.unsafe_batch_size; ++i) {
                        unsafe_batch.push_back(
                            sample_state(spec, unsafe_rng, SampleMode::kUnsafeOnly));
                    }
                    LossResult sup = unsafe_supervision_loss(result.net, unsafe_batch, spec);
                    td.grads.add_scaled(sup.grads, config.supervision_weight);
                    loss += config.supervision_weight * sup.loss;
                }
                if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
                adam_step(result.net, adam, td.grads, config.lr);
            } catch (const std::runtime_error&) {
                ok = false;
            }
            if (!ok) {
                result.net = last_good;
                result.diverged = true;
                result.steps_completed = step;
                return result;
            }
            if (step % config.target_update_period == 0) target = result.net;
        }

        if (step % config.eval_period == 0 || step == config.total_steps) {
            result.history.push_back(
                evaluate(result.net, config, spec, dynamics, step, metrics_rng));
            last_good = result.net;
        }
    }
    result.steps_completed = config.total_steps;
    return result;
}

} // namespace cbfrl
