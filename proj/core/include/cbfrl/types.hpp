#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace cbfrl {

/// A point in the state space. Length is fixed per environment
/// (cart-pole: x, x_dot, theta, theta_dot).
using StateVec = std::vector<double>;

/// Index into a finite action set, 0 <= id < action_count.
using ActionId = int;

inline bool is_finite(const StateVec& x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

/// Axis-aligned box with per-dimension bounds.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const StateVec& x) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        }
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
};

/// One environment step under the safety wrapper.
/// terminal: next_state entered the unsafe set (episode over, no bootstrap).
/// truncated: step cap reached on a safe state (episode over, bootstrap kept).
struct Transition {
    StateVec state;
    ActionId action = 0;
    double reward = 0.0;
    StateVec next_state;
    bool terminal = false;
    bool truncated = false;
};

} // namespace cbfrl
