#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cbfrl/barrier.hpp"
#include "cbfrl/safety.hpp"
#include "cbfrl/types.hpp"
#include "cbfrl/value_net.hpp"

namespace cbfrl {

/// Sampling-based verification setup. The measure is uniform over the
/// SafetySpec's bounded domain X'; all metrics are deterministic given the
/// seed and sample count.
struct VerificationConfig {
    int n_samples = 10000;
    double alpha = 0.1;
    std::uint64_t seed = 0;
};

/// 0 iff x is unsafe yet h(x) >= 0 (the boundary h = 0 counts as a
/// violation); 1 otherwise.
int rho1(const BarrierFn& h, const StateVec& x, const SafetySpec& spec);

/// 0 iff h(x) >= 0 and the best one-step successor fails the decay bound:
/// max over actions of h(f(x,u)) < (1-alpha) h(x). The action maximum is
/// an exact enumeration.
int rho2(const BarrierFn& h, double alpha, const StateVec& x, const DynamicsFn& dynamics,
         int action_count);

/// Monte-Carlo mean of rho1 * rho2 over uniform draws from X'.
double m_valid(const BarrierFn& h, const VerificationConfig& config, const SafetySpec& spec,
               const DynamicsFn& dynamics, int action_count);

/// Monte-Carlo measure of the certified set {h >= 0} within X'.
double m_cov(const BarrierFn& h, const VerificationConfig& config, const SafetySpec& spec);

/// Mean absolute one-step Bellman residual |r + gamma V(f(x,a*)) - V(x)|
/// at the greedy action, with the bootstrap suppressed when the successor
/// is unsafe, over uniform draws from X'. V(x) = max over actions of Q.
double td_error_metric(const QFunction& q, double gamma, const VerificationConfig& config,
                       const SafetySpec& spec, const DynamicsFn& dynamics);

double td_error_metric(const ValueNet& net, const VerificationConfig& config,
                       const SafetySpec& spec, const DynamicsFn& dynamics);

/// Slice of the state space for barrier heat maps: cart position/velocity
/// or pole angle/angular velocity, with the other two coordinates at 0.
enum class PhasePlane { kPosVel, kAngAngVel };

const char* phase_plane_name(PhasePlane plane);

/// Evaluates h on a resolution x resolution grid over the plane (bounds
/// from X') and writes CSV rows a,b,h,is_unsafe,in_safe_set after comment
/// lines recording the plane, fixed coordinates, R, gamma and checkpoint
/// identity. Requires resolution >= 2.
void phase_grid(std::ostream& out, const BarrierFn& h, PhasePlane plane, int resolution,
                const SafetySpec& spec, const std::string& checkpoint_id);

} // namespace cbfrl
