#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbfrl/trainer.hpp"
#include "manifest.hpp"

namespace cbfrl::cli {

/// Entry point behind main(); exposed so tests can drive the CLI
/// in-process. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args exclude argv[0]

/// Trains with `config`, writes checkpoint.txt, metrics.csv, config.txt
/// and manifest.json under out_dir.
struct TrainingArtifacts {
    TrainResult result;
    RunManifest manifest;
};

TrainingArtifacts run_training(const TrainConfig& config, const std::string& setting,
                               const std::string& out_dir);

/// One ablation-matrix cell: a full training run followed by a shielded
/// rollout evaluation (uniform-random nominal policy, diverse resets).
struct CellResult {
    Setting setting = Setting::kSigmoidSup;
    std::uint64_t seed = 0;
    MetricsRecord final_metrics;  // shield_* fields populated
    bool diverged = false;
};

CellResult run_ablation_cell(Setting setting, std::uint64_t seed, long steps,
                             const std::string& out_dir, int shield_episodes);

} // namespace cbfrl::cli
