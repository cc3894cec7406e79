#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cbfrl/gridworld.hpp"

namespace cbfrl {

/// Backward-reachability partition of a finite state set.
struct Partition {
    enum class Label { kUnsafe, kSafe, kIrrecoverable };

    std::vector<Label> labels;
    std::vector<int> k;  // minimum steps to a forced violation; 0 unless irrecoverable
    int horizon = 0;     // H = max over k

    bool is_safe(int s) const { return labels[s] == Label::kSafe; }
    bool is_unsafe(int s) const { return labels[s] == Label::kUnsafe; }
    bool is_irrecoverable(int s) const { return labels[s] == Label::kIrrecoverable; }
};

/// Exact fixed-point backward induction. A state is k-irrecoverable when
/// every action leads to an unsafe or (k-1)-irrecoverable state; states
/// that are neither unsafe nor irrecoverable are indefinitely safe.
Partition compute_partition(const TabularMDP& mdp);

/// Reward bookkeeping for the tabular Bellman operator.
/// kSurvival pays 1 for every step taken from a live state (the episode
/// return counts survived steps), so V* = (1-gamma^k)/(1-gamma) on
/// k-irrecoverable states and 1/(1-gamma) on safe ones.
/// kTransition pays 1 only when the successor stays out of the unsafe set,
/// matching TD targets that are exactly 0 on terminal transitions.
enum class RewardConvention { kSurvival, kTransition };

struct ExactValues {
    std::vector<double> v;
    double gamma = 0.0;
};

/// Sup-norm value iteration with unsafe states pinned at V = 0.
/// Throws std::invalid_argument unless 0 <= gamma < 1 and tol > 0.
ExactValues value_iteration(const TabularMDP& mdp, double gamma, double tol,
                            RewardConvention convention = RewardConvention::kSurvival);

/// Q(s,a) = r(s,a) + gamma * V(next(s,a)); rows of unsafe states are 0.
std::vector<double> q_values(const TabularMDP& mdp, const ExactValues& values,
                             RewardConvention convention = RewardConvention::kSurvival);

/// Closed-form values implied by a partition: 0 on unsafe,
/// (1-gamma^k)/(1-gamma) on k-irrecoverable, 1/(1-gamma) on safe states.
ExactValues partition_values(const Partition& partition, double gamma);

struct TheoremViolation {
    int state = 0;
    int condition = 0;        // 1: h >= 0 on an unsafe state; 2: decay bound fails
    double h = 0.0;
    double best_successor_h = 0.0;  // only meaningful for condition 2
};

struct TheoremReport {
    bool preconditions_ok = true;
    std::string warning;
    std::vector<TheoremViolation> violations;

    bool valid() const { return violations.empty(); }
};

std::string report_text(const TheoremReport& report, const std::string& title);

/// Exhaustive barrier-condition check of h = V - R over all states:
/// (i) h < 0 on every unsafe state, and (ii) for every state with
/// h >= 0, max over actions of h(successor) >= (1-alpha) h.
/// R outside ((1-gamma^H)/(1-gamma), 1/(1-gamma)] only sets a warning;
/// the check still runs.
TheoremReport verify_theorem1(const TabularMDP& mdp, const ExactValues& values,
                              const Partition& partition, double R, double alpha);

/// Same exhaustive check against an explicitly perturbed value table.
/// Precondition breaches (sup-norm distance, the eps bound, the R
/// interval, the alpha lower bound) set a warning and the check still runs.
TheoremReport verify_theorem2(const TabularMDP& mdp, const ExactValues& values,
                              const Partition& partition, double eps, double R,
                              double alpha, const std::vector<double>& perturbed_v);

/// Pointwise worst-case variant: condition (i) is checked at V* + eps and
/// condition (ii) with the state at V* + eps against successors at
/// V* - eps. Passing covers every value table within eps simultaneously.
TheoremReport verify_theorem2_worstcase(const TabularMDP& mdp, const ExactValues& values,
                                        const Partition& partition, double eps, double R,
                                        double alpha);

/// +eps on unsafe and irrecoverable states, -eps on safe states: the
/// perturbation that stresses condition (i) the hardest.
std::vector<double> adversarial_values(const ExactValues& values, const Partition& partition,
                                       double eps);

/// Per-state diagnostic rows: state_index, label, k, V_star, h, rho1, rho2.
void write_partition_csv(std::ostream& out, const TabularMDP& mdp, const ExactValues& values,
                         const Partition& partition, double R, double alpha);

} // namespace cbfrl
