#include "cbfrl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace cbfrl {

namespace {
constexpr const char* kSampleStream = "verify-samples";
}

int rho1(const BarrierFn& h, const StateVec& x, const SafetySpec& spec) {
    return (spec.is_unsafe(x) && h(x) >= 0.0) ? 0 : 1;
}

int rho2(const BarrierFn& h, double alpha, const StateVec& x, const DynamicsFn& dynamics,
         int action_count) {
    const double hx = h(x);
    if (hx < 0.0) return 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < action_count; ++a) {
        best = std::max(best, h(dynamics(x, a)));
    }
    return best < (1.0 - alpha) * hx ? 0 : 1;
}

double m_valid(const BarrierFn& h, const VerificationConfig& config, const SafetySpec& spec,
               const DynamicsFn& dynamics, int action_count) {
    if (config.n_samples <= 0) throw std::invalid_argument("m_valid: n_samples must be positive");
    RngStream rng(config.seed, kSampleStream);
    long hits = 0;
    for (int i = 0; i < config.n_samples; ++i) {
        const StateVec x = sample_state(spec, rng, SampleMode::kUniformBox);
        hits += rho1(h, x, spec) * rho2(h, config.alpha, x, dynamics, action_count);
    }
    return static_cast<double>(hits) / config.n_samples;
}

double m_cov(const BarrierFn& h, const VerificationConfig& config, const SafetySpec& spec) {
    if (config.n_samples <= 0) throw std::invalid_argument("m_cov: n_samples must be positive");
    RngStream rng(config.seed, kSampleStream);
    long hits = 0;
    for (int i = 0; i < config.n_samples; ++i) {
        const StateVec x = sample_state(spec, rng, SampleMode::kUniformBox);
        if (h(x) >= 0.0) ++hits;
    }
    return static_cast<double>(hits) / config.n_samples;
}

double td_error_metric(const QFunction& q, double gamma, const VerificationConfig& config,
                       const SafetySpec& spec, const DynamicsFn& dynamics) {
    if (config.n_samples <= 0) {
        throw std::invalid_argument("td_error_metric: n_samples must be positive");
    }
    auto value_and_greedy = [&q](const StateVec& x) {
        const std::vector<double> values = q(x);
        int best = 0;
        for (int a = 1; a < static_cast<int>(values.size()); ++a) {
            if (values[a] > values[best]) best = a;
        }
        return std::pair<double, int>(values[best], best);
    };

    RngStream rng(config.seed, kSampleStream);
    double total = 0.0;
    for (int i = 0; i < config.n_samples; ++i) {
        const StateVec x = sample_state(spec, rng, SampleMode::kUniformBox);
        const auto [v_x, a] = value_and_greedy(x);
        const StateVec next = dynamics(x, a);
        const double r = safety_reward(next, spec);
        const double target =
            spec.is_unsafe(next) ? r : r + gamma * value_and_greedy(next).first;
        total += std::abs(target - v_x);
    }
    return total / config.n_samples;
}

double td_error_metric(const ValueNet& net, const VerificationConfig& config,
                       const SafetySpec& spec, const DynamicsFn& dynamics) {
    const QFunction q = [&net](const StateVec& x) {
        const auto values = forward(net, x);
        std::vector<double> out(values.size());
        for (std::size_t a = 0; a < values.size(); ++a) out[a] = values[a].q;
        return out;
    };
    return td_error_metric(q, net.gamma, config, spec, dynamics);
}

const char* phase_plane_name(PhasePlane plane) {
    return plane == PhasePlane::kPosVel ? "pos-vel" : "ang-angvel";
}

void phase_grid(std::ostream& out, const BarrierFn& h, PhasePlane plane, int resolution,
                const SafetySpec& spec, const std::string& checkpoint_id) {
    if (resolution < 2) throw std::invalid_argument("phase_grid: resolution must be at least 2");
    const Box& box = spec.sample_domain;
    if (box.dim() != 4) throw std::invalid_argument("phase_grid: expects a 4-dimensional domain");

    const int da = plane == PhasePlane::kPosVel ? 0 : 2;
    const int db = plane == PhasePlane::kPosVel ? 1 : 3;

    out << "# plane: " << phase_plane_name(plane) << '\n';
    out << "# fixed: "
        << (plane == PhasePlane::kPosVel ? "theta=0,theta_dot=0" : "x=0,x_dot=0") << '\n';
    out << "# R: " << h.R << '\n';
    out << "# gamma: " << h.gamma << '\n';
    out << "# checkpoint: " << checkpoint_id << '\n';
    out << "a,b,h,is_unsafe,in_safe_set\n";
    out << std::setprecision(10);

    for (int i = 0; i < resolution; ++i) {
        const double a = box.lo[da] + (box.hi[da] - box.lo[da]) * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            const double b = box.lo[db] + (box.hi[db] - box.lo[db]) * j / (resolution - 1);
            StateVec x(4, 0.0);
            x[da] = a;
            x[db] = b;
            const double hv = h(x);
            out << a << ',' << b << ',' << hv << ',' << (spec.is_unsafe(x) ? 1 : 0) << ','
                << (hv >= 0.0 ? 1 : 0) << '\n';
        }
    }
}

} // namespace cbfrl
