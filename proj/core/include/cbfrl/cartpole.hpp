#pragma once

#include "cbfrl/safety.hpp"
#include "cbfrl/types.hpp"

namespace cbfrl {

/// Physical constants of the standard cart-pole benchmark, integrated with
/// one explicit Euler step per action.
struct CartPoleParams {
    double gravity = 9.8;          // m/s^2
    double cart_mass = 1.0;        // kg
    double pole_mass = 0.1;        // kg
    double pole_half_length = 0.5; // m
    double force_magnitude = 10.0; // N
    double dt = 0.02;              // s

    double x_limit = 2.4;                       // |x| >= x_limit is unsafe
    double theta_limit = 12.0 * M_PI / 180.0;   // |theta| >= 12 deg is unsafe
};

inline constexpr int kCartPoleStateDim = 4;
inline constexpr int kCartPoleActions = 2;

/// One Euler step. Action 1 pushes right (+force), action 0 pushes left.
StateVec cartpole_step(const StateVec& state, ActionId action,
                       const CartPoleParams& params = {});

/// Unsafe set {|x| >= 2.4 or |theta| >= 12 deg} with sampling domain
/// X' = [-3,3] x [-3,3] x [-0.3,0.3] x [-3,3].
SafetySpec cartpole_safety_spec(const CartPoleParams& params = {});

/// Dynamics closure for the verification and shield routines.
DynamicsFn cartpole_dynamics(const CartPoleParams& params = {});

} // namespace cbfrl
