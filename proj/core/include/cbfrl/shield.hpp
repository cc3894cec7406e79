#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "cbfrl/gridworld.hpp"
#include "cbfrl/safety.hpp"
#include "cbfrl/types.hpp"
#include "cbfrl/value_net.hpp"

namespace cbfrl {

/// The shield needs no dynamics access at deployment: Q already encodes
/// the one-step lookahead through the Bellman equality.
QFunction q_from_net(const ValueNet& net);

/// Tabular Q wrapper; states are passed as {index}, q is row-major
/// n_states x n_actions.
QFunction q_from_table(const TabularMDP& mdp, std::vector<double> q);

/// Keeps the nominal action when Q(x, nominal) >= R, otherwise substitutes
/// the Q-greedy action (argmax ties break toward the lowest index).
ActionId shielded_action(const QFunction& q, const StateVec& x, ActionId nominal, double R);

struct ShieldConfig {
    double R = 50.0;
    int episodes = 100;
    int max_steps = 500;
    std::uint64_t seed = 0;
    bool shield_enabled = true;       // false gives the unshielded baseline
    std::vector<ActionId> script;     // empty: uniform random nominal; else cycled
};

struct TraceRow {
    int episode = 0;
    int t = 0;
    StateVec state;
    ActionId action = 0;
    bool intervened = false;
};

struct RolloutSummary {
    double mean_length = 0.0;
    double success_rate = 0.0;        // fraction of episodes with no violation
    long interventions = 0;
    std::vector<int> lengths;
    std::vector<bool> successes;
    std::vector<TraceRow> trace;
};

/// Rolls out `episodes` episodes from uniform resets over `reset_box`,
/// filtering the nominal policy through the shield each step. An episode
/// succeeds when no unsafe state is entered before max_steps. Resets and
/// nominal draws come from per-episode streams, so the same seed gives the
/// same resets with the shield on or off.
RolloutSummary rollout_shielded(const QFunction& q, int action_count, const ShieldConfig& config,
                                const DynamicsFn& dynamics, const SafetySpec& spec,
                                const Box& reset_box);

/// CSV rows episode,t,state...,action,shield_intervened.
void export_trace(std::ostream& out, const RolloutSummary& summary);

} // namespace cbfrl
