#pragma once

#include <functional>

#include "cbfrl/rng.hpp"
#include "cbfrl/types.hpp"

namespace cbfrl {

/// Unsafe-state predicate plus the bounded sampling domain X' used for
/// state sampling. X' must have positive volume and a positive-volume
/// intersection with the unsafe set so rejection sampling terminates.
struct SafetySpec {
    std::function<bool(const StateVec&)> is_unsafe;
    Box sample_domain;
};

enum class SampleMode { kUniformBox, kUnsafeOnly };

/// Reward of a transition landing in `next_state`: 0 on a safety
/// violation, 1 otherwise.
/// Throws std::invalid_argument on a non-finite state (corrupted rollout).
double safety_reward(const StateVec& next_state, const SafetySpec& spec);

/// Draw a state from X' (kUniformBox) or from X' intersected with the
/// unsafe set via rejection (kUnsafeOnly). Rejection gives up after 10^6
/// draws and throws std::runtime_error: the unsafe set has negligible
/// measure in X' and the SafetySpec should be reconsidered.
StateVec sample_state(const SafetySpec& spec, RngStream& rng, SampleMode mode);

/// Deterministic one-step dynamics x' = f(x, u).
using DynamicsFn = std::function<StateVec(const StateVec&, ActionId)>;

/// Episode driver applying the safety-preserving task structure to raw
/// dynamics: reward 1 per surviving step, reward 0 and immediate
/// termination when the successor is unsafe, truncation (not termination)
/// at the step cap so the value target still bootstraps there.
class SafetyEpisode {
public:
    SafetyEpisode(DynamicsFn dynamics, SafetySpec spec, int step_cap = 500);

    /// Begin a new episode at `start`. Throws if `start` is non-finite or
    /// already unsafe.
    void reset(const StateVec& start);

    /// Apply one action. Throws std::logic_error if the episode already
    /// finished.
    Transition step(ActionId action);

    bool finished() const { return finished_; }
    int steps_taken() const { return steps_; }
    const StateVec& state() const { return state_; }

private:
    DynamicsFn dynamics_;
    SafetySpec spec_;
    int step_cap_;
    StateVec state_;
    int steps_ = 0;
    bool finished_ = true;
};

} // namespace cbfrl
