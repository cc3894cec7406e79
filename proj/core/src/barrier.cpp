#include "cbfrl/barrier.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cbfrl {

BarrierFn make_barrier(const ValueNet& net, BarrierMode mode, double R) {
    BarrierFn fn;
    fn.mode = mode;
    fn.R = R;
    fn.gamma = net.gamma;
    if (mode == BarrierMode::kRawLogit) {
        if (net.head != Head::kBounded) {
            throw std::invalid_argument("make_barrier: raw-logit mode needs a bounded head");
        }
        const double pivot = 1.0 / (2.0 * (1.0 - net.gamma));
        if (std::abs(R - pivot) > 1e-9 * pivot) {
            std::ostringstream msg;
            msg << "make_barrier: raw-logit mode requires R = 1/(2(1-gamma)) = " << pivot;
            throw std::invalid_argument(msg.str());
        }
        fn.h = [net](const StateVec& x) { return max_logit(net, x); };
    } else {
        fn.h = [net, R](const StateVec& x) { return value_of(net, x) - R; };
    }
    return fn;
}

BarrierFn make_barrier(const ExactValues& values, double R) {
    BarrierFn fn;
    fn.mode = BarrierMode::kValueMinusR;
    fn.R = R;
    fn.gamma = values.gamma;
    fn.h = [values, R](const StateVec& x) {
        if (x.size() != 1) {
            throw std::invalid_argument("tabular barrier expects a single-component state index");
        }
        const auto idx = static_cast<std::size_t>(std::llround(x[0]));
        if (idx >= values.v.size()) throw std::out_of_range("tabular barrier: state index out of range");
        return values.v[idx] - R;
    };
    return fn;
}

TransformCheck check_transform(const TransformSpec& spec, int n_samples, RngStream& rng) {
    TransformCheck result;
    // Relative slack for (i)/(ii) so exact-equality transforms (identity,
    // linear maps) do not trip on rounding.
    auto slack = [](double reference) { return 1e-12 * std::max(1.0, std::abs(reference)); };

    for (int i = 0; i < n_samples; ++i) {
        const double x = rng.uniform(spec.domain_lo, spec.domain_hi);
        const double wx = spec.w(x);
        // The growth condition binds on x >= 0 only: the preservation
        // argument applies it to barrier values of certified states.
        if (x >= 0.0 && wx < spec.C * x - slack(spec.C * x)) {
            result.pass = false;
            result.failed_condition = "(i)";
            result.x = x;
            result.w_x = wx;
            return result;
        }
        if ((wx >= 0.0) != (x >= 0.0)) {
            result.pass = false;
            result.failed_condition = "(iii)";
            result.x = x;
            result.w_x = wx;
            return result;
        }
    }
    for (int i = 0; i < n_samples; ++i) {
        // Ordered so x >= y: increments must grow at rate at least C.
        double x = rng.uniform(spec.domain_lo, spec.domain_hi);
        double y = rng.uniform(spec.domain_lo, spec.domain_hi);
        if (x < y) std::swap(x, y);
        const double lhs = spec.w(x) - spec.w(y);
        const double rhs = spec.C * (x - y);
        if (lhs < rhs - slack(rhs)) {
            result.pass = false;
            result.failed_condition = "(ii)";
            result.x = x;
            result.y = y;
            result.w_x = spec.w(x);
            result.w_y = spec.w(y);
            return result;
        }
    }
    return result;
}

double sigma_tilde_inverse(double x) {
    if (x <= -0.5 || x >= 0.5) {
        throw std::domain_error("sigma_tilde_inverse: argument must lie in (-1/2, 1/2)");
    }
    return std::log((0.5 + x) / (0.5 - x));
}

TransformSpec identity_transform(double domain_lo, double domain_hi) {
    return TransformSpec{[](double x) { return x; }, 1.0, domain_lo, domain_hi};
}

TransformSpec g_inverse_transform(double gamma) {
    return TransformSpec{[gamma](double x) { return (1.0 - gamma) * x; }, 1.0 - gamma, -50.0, 50.0};
}

TransformSpec sigma_tilde_inverse_transform() {
    return TransformSpec{[](double x) { return sigma_tilde_inverse(x); }, 1.0, -0.49, 0.49};
}

TransformSpec bounded_head_transform(double gamma) {
    // Domain where g^{-1} lands inside sigma_tilde^{-1}'s domain margin.
    const double span = 0.49 / (1.0 - gamma);
    return TransformSpec{
        [gamma](double x) { return sigma_tilde_inverse((1.0 - gamma) * x); },
        1.0 - gamma, -span, span};
}

RInterval valid_R_interval(double gamma, int horizon, double eps) {
    if (eps < 0.0) throw std::invalid_argument("valid_R_interval: eps must be nonnegative");
    const double cap = std::pow(gamma, horizon) / (2.0 * (1.0 - gamma));
    if (eps >= cap) {
        std::ostringstream msg;
        msg << "valid_R_interval: eps = " << eps
            << " must be below gamma^H / (2(1-gamma)) = " << cap << " (interval is empty)";
        throw std::invalid_argument(msg.str());
    }
    const double lo = (1.0 - std::pow(gamma, horizon)) / (1.0 - gamma) + eps;
    const double hi = 1.0 / (1.0 - gamma) - eps;
    return RInterval{lo, hi};
}

double alpha_lower_bound(double gamma, double eps, double R) {
    if (eps < 0.0) throw std::invalid_argument("alpha_lower_bound: eps must be nonnegative");
    const double hi = 1.0 / (1.0 - gamma) - eps;
    if (R >= hi) {
        std::ostringstream msg;
        msg << "alpha_lower_bound: R = " << R << " must be below 1/(1-gamma) - eps = " << hi;
        throw std::invalid_argument(msg.str());
    }
    return 2.0 * eps / (1.0 / (1.0 - gamma) + eps - R);
}

} // namespace cbfrl
