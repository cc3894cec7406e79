#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cbfrl/replay.hpp"
#include "cbfrl/safety.hpp"
#include "cbfrl/types.hpp"
#include "cbfrl/value_net.hpp"

namespace cbfrl {

/// The five ablation settings: head bounding x unsafe-set supervision x
/// diverse-reset exploration.
enum class Setting { kMlp, kSigmoid, kMlpSup, kSigmoidSup, kNoExp };

std::string setting_name(Setting s);
std::optional<Setting> parse_setting(const std::string& name);

struct EpsSchedule {
    double start = 1.0;
    double end = 0.05;
    double fraction = 0.10;  // of total_steps spent annealing
};

struct TrainConfig {
    long total_steps = 500000;
    double gamma = 0.99;
    Head arch = Head::kBounded;   // kUnbounded = MLP, kBounded = SIGMOID
    bool supervised = true;
    bool explore = true;          // diverse reset initialization
    double lr = 2.5e-4;
    int batch_size = 128;
    int target_update_period = 500;
    EpsSchedule eps;
    int unsafe_batch_size = 128;
    double supervision_weight = 1.0;
    long eval_period = 10000;
    std::uint64_t seed = 1;

    int buffer_capacity = 100000;
    long warmup_steps = 10000;
    int step_cap = 500;
    std::vector<int> hidden = {64, 64};
    int eval_rollouts = 10;
    int eval_samples = 10000;
    double eval_alpha = 0.1;
    double eval_R = 50.0;
};

TrainConfig setting_config(Setting s);

/// Initial-state distributions: the benchmark's narrow reset box, and the
/// wider box used for diverse-reset exploration (strictly inside the
/// safety thresholds, so resets are never unsafe).
Box narrow_reset_box();
Box diverse_reset_box();

StateVec reset_state(const TrainConfig& config, RngStream& rng);

struct LossResult {
    double loss = 0.0;
    GradientBuffer grads;
};

/// Mean squared TD error over the batch: Q(x,u) against
/// r + gamma max_a Q_target(x',a), with the bootstrap suppressed on
/// terminal transitions (target = r = 0) and kept on truncated ones.
/// Throws on an empty batch or a non-finite target.
LossResult td_loss(const ValueNet& net, const ValueNet& target_net,
                   const std::vector<Transition>& batch);

/// Mean over the batch and over all actions of Q(x,u)^2, driving the value
/// toward 0 across the unsafe set. Throws std::invalid_argument if the
/// batch contains a safe state (sampler bug).
LossResult unsafe_supervision_loss(const ValueNet& net, const std::vector<StateVec>& batch,
                                   const SafetySpec& spec);

struct MetricsRecord {
    long step = 0;
    double return_mean = 0.0;
    double td_error = 0.0;
    double m_valid = 0.0;
    double m_cov = 0.0;
    // Filled by shield evaluations; NaN while training.
    double shield_success_rate = std::numeric_limits<double>::quiet_NaN();
    double shield_mean_length = std::numeric_limits<double>::quiet_NaN();
};

/// CSV with header step,return_mean,td_error,m_valid,m_cov.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& history);

struct TrainResult {
    ValueNet net;
    std::vector<MetricsRecord> history;
    bool diverged = false;
    long steps_completed = 0;
};

/// Full training loop on the safety-wrapped cart-pole: eps-greedy rollouts
/// with early termination, replay, combined TD + supervision loss, Adam,
/// periodic target copies and metric evaluations. Deterministic given the
/// config (all randomness from the config seed, split into named streams).
/// On divergence (non-finite loss) aborts with the last evaluated network.
TrainResult train(const TrainConfig& config);

} // namespace cbfrl
