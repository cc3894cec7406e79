#pragma once

#include <functional>
#include <string>

#include "cbfrl/oracle.hpp"
#include "cbfrl/rng.hpp"
#include "cbfrl/types.hpp"
#include "cbfrl/value_net.hpp"

namespace cbfrl {

/// How a barrier candidate is read off a value function.
/// kValueMinusR: h(x) = V(x) - R.
/// kRawLogit: h(x) = max-action pre-head logit phi(x); only meaningful for
/// bounded heads with R = 1/(2(1-gamma)), where it equals
/// sigma_tilde^{-1}(g^{-1}(V(x) - R)) and so shares the sign of V(x) - R.
enum class BarrierMode { kValueMinusR, kRawLogit };

struct BarrierFn {
    std::function<double(const StateVec&)> h;
    BarrierMode mode = BarrierMode::kValueMinusR;
    double R = 0.0;
    double gamma = 0.0;

    double operator()(const StateVec& x) const { return h(x); }
};

/// Barrier from a trained network. Throws std::invalid_argument when
/// kRawLogit is requested on an unbounded head or with R away from
/// 1/(2(1-gamma)).
BarrierFn make_barrier(const ValueNet& net, BarrierMode mode, double R);

/// Barrier over a tabular value table; states are passed as {index}.
BarrierFn make_barrier(const ExactValues& values, double R);

/// Candidate barrier-preserving transform w with its constant C; checked
/// by sampling over [domain_lo, domain_hi].
struct TransformSpec {
    std::function<double(double)> w;
    double C = 0.0;
    double domain_lo = -1.0;
    double domain_hi = 1.0;
};

struct TransformCheck {
    bool pass = true;
    std::string failed_condition;  // "(i)", "(ii)" or "(iii)" when pass is false
    double x = 0.0;                // counterexample point (and y for "(ii)")
    double y = 0.0;
    double w_x = 0.0;
    double w_y = 0.0;
};

/// Samples n_samples points and n_samples pairs from the domain and checks
/// (i) w(x) >= C x on x >= 0 (the side the preservation argument uses),
/// (ii) w(x) - w(y) >= C (x - y), and (iii) w(x) >= 0 exactly when x >= 0.
/// Returns the first counterexample found.
TransformCheck check_transform(const TransformSpec& spec, int n_samples, RngStream& rng);

/// sigma_tilde(z) = sigma(z) - 1/2; its inverse log((1/2+x)/(1/2-x)) on
/// (-1/2, 1/2).
double sigma_tilde_inverse(double x);

TransformSpec identity_transform(double domain_lo = -50.0, double domain_hi = 50.0);
TransformSpec g_inverse_transform(double gamma);            // w(x) = (1-gamma) x
TransformSpec sigma_tilde_inverse_transform();              // sampled over [-0.49, 0.49]
TransformSpec bounded_head_transform(double gamma);         // sigma_tilde^{-1} o g^{-1}

/// Admissible thresholds (lo, hi]. eps = 0 gives the exact-value interval
/// ((1-gamma^H)/(1-gamma), 1/(1-gamma)]. Throws std::invalid_argument when
/// eps >= gamma^H / (2(1-gamma)) (the interval would be empty).
struct RInterval {
    double lo = 0.0;  // open
    double hi = 0.0;  // closed

    bool contains(double r) const { return r > lo && r <= hi; }
};

RInterval valid_R_interval(double gamma, int horizon, double eps);

/// Smallest admissible decay rate 2 eps / (1/(1-gamma) + eps - R).
/// Requires R < 1/(1-gamma) - eps so the bound stays below 1.
double alpha_lower_bound(double gamma, double eps, double R);

} // namespace cbfrl
