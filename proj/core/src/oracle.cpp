#include "cbfrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cbfrl {

Partition compute_partition(const TabularMDP& mdp) {
    const int n = mdp.n_states;
    Partition p;
    p.labels.assign(n, Partition::Label::kSafe);
    p.k.assign(n, 0);

    for (int s = 0; s < n; ++s) {
        if (mdp.is_unsafe(s)) p.labels[s] = Partition::Label::kUnsafe;
    }

    // Sweep to the fixed point. A state becomes irrecoverable once every
    // action leads to an unsafe or already-irrecoverable state; the best
    // the controller can do is delay, so k = 1 + max over successors.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (p.labels[s] != Partition::Label::kSafe) continue;
            bool all_doomed = true;
            int slowest = 0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                const int t = mdp.successor(s, a);
                if (p.labels[t] == Partition::Label::kSafe) {
                    all_doomed = false;
                    break;
                }
                slowest = std::max(slowest, p.k[t]);
            }
            if (all_doomed) {
                p.labels[s] = Partition::Label::kIrrecoverable;
                p.k[s] = 1 + slowest;
                changed = true;
            }
        }
    }

    p.horizon = 0;
    for (int s = 0; s < n; ++s) p.horizon = std::max(p.horizon, p.k[s]);
    return p;
}

namespace {

double step_reward(const TabularMDP& mdp, int s, int a, RewardConvention convention) {
    if (convention == RewardConvention::kSurvival) return 1.0;
    return mdp.is_unsafe(mdp.successor(s, a)) ? 0.0 : 1.0;
}

} // namespace

ExactValues value_iteration(const TabularMDP& mdp, double gamma, double tol,
                            RewardConvention convention) {
    if (gamma < 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("value_iteration: gamma must be in [0, 1)");
    }
    if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be positive");

    const int n = mdp.n_states;
    std::vector<double> v(n, 0.0), next_v(n, 0.0);
    double delta = tol;
    while (delta >= tol) {
        delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_unsafe(s)) {
                next_v[s] = 0.0;
                continue;
            }
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                const double q = step_reward(mdp, s, a, convention) +
                                 gamma * v[mdp.successor(s, a)];
                best = std::max(best, q);
            }
            next_v[s] = best;
            delta = std::max(delta, std::abs(best - v[s]));
        }
        v.swap(next_v);
    }
    return ExactValues{std::move(v), gamma};
}

std::vector<double> q_values(const TabularMDP& mdp, const ExactValues& values,
                             RewardConvention convention) {
    std::vector<double> q(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.is_unsafe(s)) continue;
        for (int a = 0; a < mdp.n_actions; ++a) {
            q[s * mdp.n_actions + a] = step_reward(mdp, s, a, convention) +
                                       values.gamma * values.v[mdp.successor(s, a)];
        }
    }
    return q;
}

ExactValues partition_values(const Partition& partition, double gamma) {
    ExactValues out;
    out.gamma = gamma;
    out.v.resize(partition.labels.size());
    for (std::size_t s = 0; s < partition.labels.size(); ++s) {
        switch (partition.labels[s]) {
            case Partition::Label::kUnsafe:
                out.v[s] = 0.0;
                break;
            case Partition::Label::kSafe:
                out.v[s] = 1.0 / (1.0 - gamma);
                break;
            case Partition::Label::kIrrecoverable:
                out.v[s] = (1.0 - std::pow(gamma, partition.k[s])) / (1.0 - gamma);
                break;
        }
    }
    return out;
}

namespace {

// Shared exhaustive check of the two barrier conditions on a finite MDP.
// h_state is used for condition (i) and the left side of (ii);
// h_successor for the successors inside (ii).
template <typename HState, typename HSucc>
void check_conditions(const TabularMDP& mdp, double alpha, HState h_state, HSucc h_successor,
                      TheoremReport& report) {
    for (int s = 0; s < mdp.n_states; ++s) {
        const double h = h_state(s);
        if (mdp.is_unsafe(s) && h >= 0.0) {
            report.violations.push_back({s, 1, h, 0.0});
        }
        if (h >= 0.0) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                best = std::max(best, h_successor(mdp.successor(s, a)));
            }
            if (best < (1.0 - alpha) * h) {
                report.violations.push_back({s, 2, h, best});
            }
        }
    }
}

double interval_lo(double gamma, int horizon) {
    return (1.0 - std::pow(gamma, horizon)) / (1.0 - gamma);
}

} // namespace

std::string report_text(const TheoremReport& report, const std::string& title) {
    std::ostringstream out;
    out << title << ": " << report.violations.size() << " violations";
    if (!report.warning.empty()) out << " [warning: " << report.warning << "]";
    out << '\n';
    for (const TheoremViolation& v : report.violations) {
        if (v.condition == 1) {
            out << "  state " << v.state << ": h = " << v.h << " >= 0 on an unsafe state\n";
        } else {
            out << "  state " << v.state << ": best successor h = " << v.best_successor_h
                << " < (1-alpha) * " << v.h << '\n';
        }
    }
    return out.str();
}

TheoremReport verify_theorem1(const TabularMDP& mdp, const ExactValues& values,
                              const Partition& partition, double R, double alpha) {
    TheoremReport report;
    const double lo = interval_lo(values.gamma, partition.horizon);
    const double hi = 1.0 / (1.0 - values.gamma);
    if (!(R > lo && R <= hi)) {
        report.preconditions_ok = false;
        std::ostringstream w;
        w << "R = " << R << " outside (" << lo << ", " << hi << "]";
        report.warning = w.str();
    }
    auto h = [&](int s) { return values.v[s] - R; };
    check_conditions(mdp, alpha, h, h, report);
    return report;
}

TheoremReport verify_theorem2(const TabularMDP& mdp, const ExactValues& values,
                              const Partition& partition, double eps, double R,
                              double alpha, const std::vector<double>& perturbed_v) {
    if (perturbed_v.size() != values.v.size()) {
        throw std::invalid_argument("verify_theorem2: perturbed value table has wrong size");
    }
    TheoremReport report;
    std::ostringstream w;

    double sup_err = 0.0;
    for (std::size_t s = 0; s < perturbed_v.size(); ++s) {
        sup_err = std::max(sup_err, std::abs(perturbed_v[s] - values.v[s]));
    }
    const double gamma = values.gamma;
    const double eps_cap = std::pow(gamma, partition.horizon) / (2.0 * (1.0 - gamma));
    const double lo = interval_lo(gamma, partition.horizon) + eps;
    const double hi = 1.0 / (1.0 - gamma) - eps;
    const double alpha_floor = 2.0 * eps / (1.0 / (1.0 - gamma) + eps - R);

    // Slack absorbs rounding when the perturbation sits exactly at +-eps.
    if (sup_err > eps + 1e-9 * (1.0 + eps)) {
        w << "sup|V - V*| = " << sup_err << " exceeds eps; ";
    }
    if (!(eps < eps_cap)) w << "eps >= gamma^H / (2(1-gamma)) = " << eps_cap << "; ";
    if (!(R > lo && R <= hi)) w << "R = " << R << " outside (" << lo << ", " << hi << "]; ";
    if (!(alpha >= alpha_floor && alpha <= 1.0)) {
        w << "alpha = " << alpha << " outside [" << alpha_floor << ", 1]; ";
    }
    report.warning = w.str();
    report.preconditions_ok = report.warning.empty();

    auto h = [&](int s) { return perturbed_v[s] - R; };
    check_conditions(mdp, alpha, h, h, report);
    return report;
}

TheoremReport verify_theorem2_worstcase(const TabularMDP& mdp, const ExactValues& values,
                                        const Partition& partition, double eps, double R,
                                        double alpha) {
    std::vector<double> high(values.v.size()), low(values.v.size());
    for (std::size_t s = 0; s < values.v.size(); ++s) {
        high[s] = values.v[s] + eps;
        low[s] = values.v[s] - eps;
    }
    TheoremReport report = verify_theorem2(mdp, values, partition, eps, R, alpha, high);
    report.violations.clear();
    check_conditions(
        mdp, alpha, [&](int s) { return high[s] - R; }, [&](int s) { return low[s] - R; },
        report);
    return report;
}

std::vector<double> adversarial_values(const ExactValues& values, const Partition& partition,
                                       double eps) {
    std::vector<double> out(values.v.size());
    for (std::size_t s = 0; s < values.v.size(); ++s) {
        out[s] = values.v[s] + (partition.is_safe(static_cast<int>(s)) ? -eps : eps);
    }
    return out;
}

void write_partition_csv(std::ostream& out, const TabularMDP& mdp, const ExactValues& values,
                         const Partition& partition, double R, double alpha) {
    auto label_name = [](Partition::Label l) {
        switch (l) {
            case Partition::Label::kUnsafe: return "unsafe";
            case Partition::Label::kSafe: return "safe";
            case Partition::Label::kIrrecoverable: return "irrecoverable";
        }
        return "?";
    };
    out << "state_index,label,k,V_star,h,rho1,rho2\n";
    for (int s = 0; s < mdp.n_states; ++s) {
        const double h = values.v[s] - R;
        const int rho1 = (mdp.is_unsafe(s) && h >= 0.0) ? 0 : 1;
        int rho2 = 1;
        if (h >= 0.0) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                best = std::max(best, values.v[mdp.successor(s, a)] - R);
            }
            if (best < (1.0 - alpha) * h) rho2 = 0;
        }
        out << s << ',' << label_name(partition.labels[s]) << ',' << partition.k[s] << ','
            << values.v[s] << ',' << h << ',' << rho1 << ',' << rho2 << '\n';
    }
}

} // namespace cbfrl
