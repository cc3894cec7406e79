#include "cbfrl/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace cbfrl {

StateVec cartpole_step(const StateVec& state, ActionId action, const CartPoleParams& p) {
    if (state.size() != kCartPoleStateDim) {
        throw std::invalid_argument("cartpole_step: state must have 4 components");
    }
    if (action != 0 && action != 1) {
        throw std::invalid_argument("cartpole_step: action must be 0 or 1");
    }

    const double x = state[0];
    const double x_dot = state[1];
    const double theta = state[2];
    const double theta_dot = state[3];

    const double force = (action == 1) ? p.force_magnitude : -p.force_magnitude;
    const double total_mass = p.cart_mass + p.pole_mass;
    const double polemass_length = p.pole_mass * p.pole_half_length;

    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);

    const double temp =
        (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

    // Euler: positions advance with the old velocities.
    return {x + p.dt * x_dot,
            x_dot + p.dt * x_acc,
            theta + p.dt * theta_dot,
            theta_dot + p.dt * theta_acc};
}

SafetySpec cartpole_safety_spec(const CartPoleParams& p) {
    SafetySpec spec;
    spec.is_unsafe = [x_lim = p.x_limit, th_lim = p.theta_limit](const StateVec& s) {
        return std::abs(s[0]) >= x_lim || std::abs(s[2]) >= th_lim;
    };
    spec.sample_domain = Box{{-3.0, -3.0, -0.30, -3.0}, {3.0, 3.0, 0.30, 3.0}};
    return spec;
}

DynamicsFn cartpole_dynamics(const CartPoleParams& p) {
    return [p](const StateVec& s, ActionId a) { return cartpole_step(s, a, p); };
}

} // namespace cbfrl
