#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cbfrl/barrier.hpp"
#include "cbfrl/cartpole.hpp"
#include "cbfrl/gridworld.hpp"
#include "cbfrl/oracle.hpp"
#include "cbfrl/shield.hpp"
#include "cbfrl/verification.hpp"
#include "kvconfig.hpp"

namespace fs = std::filesystem;

namespace cbfrl::cli {

namespace {

BarrierMode resolve_mode(const std::string& mode, const ValueNet& net) {
    if (mode == "auto") {
        return net.head == Head::kBounded ? BarrierMode::kRawLogit : BarrierMode::kValueMinusR;
    }
    if (mode == "raw-logit") return BarrierMode::kRawLogit;
    return BarrierMode::kValueMinusR;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

struct Stats {
    double mean = 0.0;
    double stdev = 0.0;
};

Stats stats_of(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stdev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

} // namespace

TrainingArtifacts run_training(const TrainConfig& config, const std::string& setting,
                               const std::string& out_dir) {
    fs::create_directories(out_dir);

    const auto start = std::chrono::steady_clock::now();
    TrainingArtifacts artifacts;
    artifacts.result = train(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir(out_dir);
    const std::string arch = config.arch == Head::kBounded ? "SIGMOID" : "MLP";
    save_checkpoint_file((dir / "checkpoint.txt").string(), artifacts.result.net, arch);
    {
        std::ofstream metrics(dir / "metrics.csv");
        write_metrics_csv(metrics, artifacts.result.history);
    }
    {
        std::ofstream cfg(dir / "config.txt");
        cfg << config_to_kv(config, setting).serialize();
    }

    RunManifest& manifest = artifacts.manifest;
    manifest.setting = setting;
    manifest.seed = config.seed;
    manifest.config = config_to_kv(config, setting).entries();
    manifest.checkpoint_file = "checkpoint.txt";
    manifest.checkpoint_sha1 = git_blob_sha1_file((dir / "checkpoint.txt").string());
    manifest.files = {"checkpoint.txt", "metrics.csv", "config.txt"};
    manifest.duration_seconds = seconds;
    write_manifest((dir / "manifest.json").string(), manifest);

    if (artifacts.result.diverged) {
        std::cerr << "warning: training diverged at step " << artifacts.result.steps_completed
                  << "; checkpoint holds the last evaluated network\n";
    }
    return artifacts;
}

CellResult run_ablation_cell(Setting setting, std::uint64_t seed, long steps,
                             const std::string& out_dir, int shield_episodes) {
    TrainConfig config = setting_config(setting);
    config.seed = seed;
    config.total_steps = steps;

    CellResult cell;
    cell.setting = setting;
    cell.seed = seed;

    TrainResult result;
    if (out_dir.empty()) {
        result = train(config);
    } else {
        result = run_training(config, setting_name(setting), out_dir).result;
    }
    cell.diverged = result.diverged;
    cell.final_metrics = result.history.empty() ? MetricsRecord{} : result.history.back();

    ShieldConfig scfg;
    scfg.R = config.eval_R;
    scfg.episodes = shield_episodes;
    scfg.max_steps = config.step_cap;
    scfg.seed = seed;
    const RolloutSummary shielded =
        rollout_shielded(q_from_net(result.net), result.net.action_count(), scfg,
                         cartpole_dynamics(), cartpole_safety_spec(), diverse_reset_box());
    cell.final_metrics.shield_success_rate = shielded.success_rate;
    cell.final_metrics.shield_mean_length = shielded.mean_length;
    return cell;
}

namespace {

int cmd_train(const std::string& setting_name_arg, const std::string& config_path,
              std::uint64_t seed, long steps, const std::string& out_dir, bool seed_given,
              bool steps_given) {
    const auto setting = parse_setting(setting_name_arg);
    if (!setting) throw std::invalid_argument("unknown setting '" + setting_name_arg + "'");

    TrainConfig config = setting_config(*setting);
    if (!config_path.empty()) {
        config = apply_config(KvConfig::load_file(config_path), config);
    }
    if (seed_given) config.seed = seed;
    if (steps_given) config.total_steps = steps;

    const RunManifest manifest = run_training(config, setting_name(*setting), out_dir).manifest;
    std::cout << "trained " << manifest.setting << " seed " << manifest.seed << " for "
              << config.total_steps << " steps in " << manifest.duration_seconds << " s\n"
              << "checkpoint sha1 " << manifest.checkpoint_sha1 << "\n";
    return 0;
}

int cmd_verify(const std::string& checkpoint_path, int samples, double alpha, double R,
               std::uint64_t seed, const std::string& mode, const std::string& phase,
               int grid, const std::string& out_path) {
    const Checkpoint ckpt = load_checkpoint_file(checkpoint_path);
    const BarrierFn barrier = make_barrier(ckpt.net, resolve_mode(mode, ckpt.net), R);

    const SafetySpec spec = cartpole_safety_spec();
    const DynamicsFn dynamics = cartpole_dynamics();
    VerificationConfig vcfg{samples, alpha, seed};

    std::cout.precision(6);
    std::cout << "m_valid " << m_valid(barrier, vcfg, spec, dynamics, ckpt.net.action_count())
              << "\n";
    std::cout << "m_cov " << m_cov(barrier, vcfg, spec) << "\n";
    std::cout << "td_error " << td_error_metric(ckpt.net, vcfg, spec, dynamics) << "\n";

    if (!phase.empty()) {
        const PhasePlane plane = phase == "pos-vel" ? PhasePlane::kPosVel : PhasePlane::kAngAngVel;
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        phase_grid(out, barrier, plane, grid, spec, checkpoint_path);
        std::cout << "phase grid written to " << out_path << "\n";
    }
    return 0;
}

int cmd_phase(const std::string& checkpoint_path, const std::string& plane_name, int grid,
              double R, const std::string& mode, const std::string& out_path) {
    const Checkpoint ckpt = load_checkpoint_file(checkpoint_path);
    const BarrierFn barrier = make_barrier(ckpt.net, resolve_mode(mode, ckpt.net), R);
    const PhasePlane plane =
        plane_name == "pos-vel" ? PhasePlane::kPosVel : PhasePlane::kAngAngVel;

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    phase_grid(out, barrier, plane, grid, cartpole_safety_spec(), checkpoint_path);
    std::cout << "phase grid written to " << out_path << "\n";
    return 0;
}

int cmd_shield(const std::string& checkpoint_path, int episodes, double R,
               const std::string& r_sweep, std::uint64_t seed, int max_steps,
               const std::string& nominal, const std::string& out_dir) {
    const Checkpoint ckpt = load_checkpoint_file(checkpoint_path);
    const QFunction q = q_from_net(ckpt.net);
    const SafetySpec spec = cartpole_safety_spec();
    const DynamicsFn dynamics = cartpole_dynamics();
    const Box resets = diverse_reset_box();

    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "shield_summary.csv");
    summary << "R,shielded,episode,length,success\n";

    std::vector<double> rs = {R};
    for (double r : parse_double_list(r_sweep)) {
        if (std::find(rs.begin(), rs.end(), r) == rs.end()) rs.push_back(r);
    }

    ShieldConfig cfg;
    cfg.episodes = episodes;
    cfg.max_steps = max_steps;
    cfg.seed = seed;
    if (nominal == "left") cfg.script = {0};
    if (nominal == "right") cfg.script = {1};

    // Unshielded baseline under the same resets.
    ShieldConfig base_cfg = cfg;
    base_cfg.shield_enabled = false;
    const RolloutSummary baseline =
        rollout_shielded(q, ckpt.net.action_count(), base_cfg, dynamics, spec, resets);
    for (int ep = 0; ep < episodes; ++ep) {
        summary << "nan,0," << ep << ',' << baseline.lengths[ep] << ','
                << (baseline.successes[ep] ? 1 : 0) << '\n';
    }
    std::cout << "unshielded: mean_length " << baseline.mean_length << " success_rate "
              << baseline.success_rate << "\n";

    for (double r : rs) {
        cfg.R = r;
        const RolloutSummary rollout =
            rollout_shielded(q, ckpt.net.action_count(), cfg, dynamics, spec, resets);
        for (int ep = 0; ep < episodes; ++ep) {
            summary << r << ",1," << ep << ',' << rollout.lengths[ep] << ','
                    << (rollout.successes[ep] ? 1 : 0) << '\n';
        }
        std::cout << "R=" << r << ": mean_length " << rollout.mean_length << " success_rate "
                  << rollout.success_rate << " interventions " << rollout.interventions << "\n";
        if (r == R) {
            std::ofstream trace(fs::path(out_dir) / "shield_trace.csv");
            export_trace(trace, rollout);
        }
    }
    return 0;
}

int cmd_oracle(double gamma, const std::string& map_path, double R, double alpha, double eps,
               double tol, const std::string& out_path, bool print_map) {
    GridWorld gw;
    if (map_path.empty()) {
        gw = default_gridworld();
    } else {
        std::ifstream in(map_path);
        if (!in) throw std::runtime_error("cannot open map " + map_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        gw = gridworld_from_map(buf.str());
    }
    if (print_map) std::cout << gridworld_to_map(gw);

    const Partition partition = compute_partition(gw.mdp);
    const ExactValues values = value_iteration(gw.mdp, gamma, tol);

    int n_unsafe = 0, n_safe = 0, n_irrec = 0;
    for (int s = 0; s < gw.mdp.n_states; ++s) {
        if (partition.is_unsafe(s)) ++n_unsafe;
        else if (partition.is_safe(s)) ++n_safe;
        else ++n_irrec;
    }
    std::cout << "gridworld " << gw.width << "x" << gw.height << ": " << n_safe << " safe, "
              << n_irrec << " irrecoverable, " << n_unsafe << " unsafe, H = "
              << partition.horizon << "\n";

    const TheoremReport t1 = verify_theorem1(gw.mdp, values, partition, R, alpha);
    std::ostringstream title1;
    title1 << "Theorem 1 (R=" << R << ", alpha=" << alpha << ")";
    std::cout << report_text(t1, title1.str());

    if (eps > 0.0) {
        const std::vector<double> adversarial = adversarial_values(values, partition, eps);
        const TheoremReport t2 =
            verify_theorem2(gw.mdp, values, partition, eps, R, alpha, adversarial);
        std::ostringstream title2;
        title2 << "Theorem 2 (eps=" << eps << ", R=" << R << ", alpha=" << alpha
               << ", adversarial perturbation)";
        std::cout << report_text(t2, title2.str());

        const TheoremReport t2w =
            verify_theorem2_worstcase(gw.mdp, values, partition, eps, R, alpha);
        std::ostringstream title2w;
        title2w << "Theorem 2 (eps=" << eps << ", R=" << R << ", alpha=" << alpha
                << ", pointwise worst case)";
        std::cout << report_text(t2w, title2w.str());
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        write_partition_csv(out, gw.mdp, values, partition, R, alpha);
        std::cout << "partition csv written to " << out_path << "\n";
    }
    return 0;
}

int cmd_ablate(int seeds, long steps, const std::string& out_dir, int jobs,
               const std::string& settings_csv, int shield_episodes) {
    std::vector<Setting> settings;
    {
        std::istringstream ss(settings_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto s = parse_setting(tok);
            if (!s) throw std::invalid_argument("unknown setting '" + tok + "'");
            settings.push_back(*s);
        }
    }
    if (settings.empty() || seeds <= 0) {
        throw std::invalid_argument("ablate needs at least one setting and one seed");
    }
    fs::create_directories(out_dir);

    struct Job {
        Setting setting;
        std::uint64_t seed;
    };
    std::vector<Job> queue;
    for (Setting s : settings) {
        for (int seed = 1; seed <= seeds; ++seed) {
            queue.push_back({s, static_cast<std::uint64_t>(seed)});
        }
    }

    std::vector<CellResult> cells(queue.size());
    std::mutex io_mutex;
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= queue.size()) return;
            const Job& job = queue[i];
            const std::string cell_dir =
                (fs::path(out_dir) / (setting_name(job.setting) + "-s" + std::to_string(job.seed)))
                    .string();
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cout << "running " << setting_name(job.setting) << " seed " << job.seed
                          << " (" << steps << " steps)\n";
            }
            cells[i] = run_ablation_cell(job.setting, job.seed, steps, cell_dir, shield_episodes);
        }
    };

    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(queue.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream csv(fs::path(out_dir) / "ablation.csv");
    csv << "setting,bounded,supervised,exploration,"
           "return_mean,return_std,td_error_mean,td_error_std,"
           "m_valid_mean,m_valid_std,m_cov_mean,m_cov_std,"
           "shield_return_mean,shield_return_std\n";
    for (Setting s : settings) {
        std::vector<double> ret, td, valid, cov, shield_len;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            if (queue[i].setting != s) continue;
            ret.push_back(cells[i].final_metrics.return_mean);
            td.push_back(cells[i].final_metrics.td_error);
            valid.push_back(cells[i].final_metrics.m_valid);
            cov.push_back(cells[i].final_metrics.m_cov);
            shield_len.push_back(cells[i].final_metrics.shield_mean_length);
        }
        const TrainConfig cfg = setting_config(s);
        const Stats r = stats_of(ret), t = stats_of(td), v = stats_of(valid), c = stats_of(cov),
                    sh = stats_of(shield_len);
        csv << setting_name(s) << ',' << (cfg.arch == Head::kBounded ? "yes" : "no") << ','
            << (cfg.supervised ? "yes" : "no") << ',' << (cfg.explore ? "yes" : "no") << ','
            << r.mean << ',' << r.stdev << ',' << t.mean << ',' << t.stdev << ',' << v.mean << ','
            << v.stdev << ',' << c.mean << ',' << c.stdev << ',' << sh.mean << ',' << sh.stdev
            << '\n';
    }
    std::cout << "ablation matrix written to " << (fs::path(out_dir) / "ablation.csv").string()
              << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"cbfrl: learn, verify, and deploy value-function safety certificates"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a Q-network on the safety task");
    std::string train_setting = "sigmoid-sup", train_config, train_out;
    std::uint64_t train_seed = 1;
    long train_steps = 500000;
    train_cmd->add_option("--setting", train_setting, "mlp|sigmoid|mlp-sup|sigmoid-sup|noexp")
        ->check(CLI::IsMember({"mlp", "sigmoid", "mlp-sup", "sigmoid-sup", "noexp"}));
    train_cmd->add_option("--config", train_config, "key = value config file");
    auto* seed_opt = train_cmd->add_option("--seed", train_seed, "master seed");
    auto* steps_opt = train_cmd->add_option("--steps", train_steps, "total environment steps");
    train_cmd->add_option("--out", train_out, "output directory")->required();
    train_cmd->callback([&]() {
        cmd_train(train_setting, train_config, train_seed, train_steps, train_out,
                  seed_opt->count() > 0, steps_opt->count() > 0);
    });

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Sampling-based barrier metrics");
    std::string verify_ckpt, verify_mode = "auto", verify_phase, verify_out = "phase.csv";
    int verify_samples = 10000, verify_grid = 64;
    double verify_alpha = 0.1, verify_R = 50.0;
    std::uint64_t verify_seed = 0;
    verify_cmd->add_option("--checkpoint", verify_ckpt, "checkpoint file")->required();
    verify_cmd->add_option("--samples", verify_samples, "Monte-Carlo sample count");
    verify_cmd->add_option("--alpha", verify_alpha, "decay rate in condition (ii)");
    verify_cmd->add_option("--R", verify_R, "barrier threshold");
    verify_cmd->add_option("--seed", verify_seed, "sampling seed");
    verify_cmd->add_option("--mode", verify_mode, "auto|value-minus-r|raw-logit")
        ->check(CLI::IsMember({"auto", "value-minus-r", "raw-logit"}));
    verify_cmd->add_option("--phase", verify_phase, "also export a phase grid")
        ->check(CLI::IsMember({"pos-vel", "ang-angvel"}));
    verify_cmd->add_option("--grid", verify_grid, "phase grid resolution");
    verify_cmd->add_option("--out", verify_out, "phase grid output file");
    verify_cmd->callback([&]() {
        cmd_verify(verify_ckpt, verify_samples, verify_alpha, verify_R, verify_seed, verify_mode,
                   verify_phase, verify_grid, verify_out);
    });

    // phase
    auto* phase_cmd = app.add_subcommand("phase", "Export a barrier phase-plane grid");
    std::string phase_ckpt, phase_plane = "pos-vel", phase_mode = "auto", phase_out = "phase.csv";
    int phase_grid_n = 64;
    double phase_R = 50.0;
    phase_cmd->add_option("--checkpoint", phase_ckpt, "checkpoint file")->required();
    phase_cmd->add_option("--plane", phase_plane, "pos-vel|ang-angvel")
        ->check(CLI::IsMember({"pos-vel", "ang-angvel"}));
    phase_cmd->add_option("--grid", phase_grid_n, "grid resolution");
    phase_cmd->add_option("--R", phase_R, "barrier threshold");
    phase_cmd->add_option("--mode", phase_mode, "auto|value-minus-r|raw-logit")
        ->check(CLI::IsMember({"auto", "value-minus-r", "raw-logit"}));
    phase_cmd->add_option("--out", phase_out, "output CSV");
    phase_cmd->callback([&]() {
        cmd_phase(phase_ckpt, phase_plane, phase_grid_n, phase_R, phase_mode, phase_out);
    });

    // shield
    auto* shield_cmd = app.add_subcommand("shield", "Roll out the safety-constrained policy");
    std::string shield_ckpt, shield_sweep, shield_nominal = "uniform", shield_out = "shield-out";
    int shield_episodes = 100, shield_max_steps = 500;
    double shield_R = 50.0;
    std::uint64_t shield_seed = 0;
    shield_cmd->add_option("--checkpoint", shield_ckpt, "checkpoint file")->required();
    shield_cmd->add_option("--episodes", shield_episodes, "episode count");
    shield_cmd->add_option("--R", shield_R, "shield threshold");
    shield_cmd->add_option("--R-sweep", shield_sweep, "extra thresholds, comma separated");
    shield_cmd->add_option("--seed", shield_seed, "rollout seed");
    shield_cmd->add_option("--max-steps", shield_max_steps, "episode step cap");
    shield_cmd->add_option("--nominal", shield_nominal, "uniform|left|right")
        ->check(CLI::IsMember({"uniform", "left", "right"}));
    shield_cmd->add_option("--out", shield_out, "output directory");
    shield_cmd->callback([&]() {
        cmd_shield(shield_ckpt, shield_episodes, shield_R, shield_sweep, shield_seed,
                   shield_max_steps, shield_nominal, shield_out);
    });

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact tabular partition and theorem checks");
    std::string oracle_map, oracle_out;
    double oracle_gamma = 0.99, oracle_R = 50.0, oracle_alpha = 0.1, oracle_eps = 0.0,
           oracle_tol = 1e-9;
    bool oracle_print_map = false;
    oracle_cmd->add_option("--gamma", oracle_gamma, "discount factor");
    oracle_cmd->add_option("--map", oracle_map, "gridworld map file (default: built-in 8x8)");
    oracle_cmd->add_option("--R", oracle_R, "barrier threshold");
    oracle_cmd->add_option("--alpha", oracle_alpha, "decay rate");
    oracle_cmd->add_option("--eps", oracle_eps, "value-error bound for the perturbed check");
    oracle_cmd->add_option("--tol", oracle_tol, "value-iteration tolerance");
    oracle_cmd->add_option("--out", oracle_out, "partition CSV output file");
    oracle_cmd->add_flag("--print-map", oracle_print_map, "echo the map");
    oracle_cmd->callback([&]() {
        cmd_oracle(oracle_gamma, oracle_map, oracle_R, oracle_alpha, oracle_eps, oracle_tol,
                   oracle_out, oracle_print_map);
    });

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the full setting x seed matrix");
    std::string ablate_out = "ablate-out",
                ablate_settings = "mlp,sigmoid,mlp-sup,sigmoid-sup,noexp";
    int ablate_seeds = 5, ablate_jobs = static_cast<int>(std::thread::hardware_concurrency()),
        ablate_episodes = 100;
    long ablate_steps = 500000;
    ablate_cmd->add_option("--seeds", ablate_seeds, "seeds per setting");
    ablate_cmd->add_option("--steps", ablate_steps, "training steps per cell");
    ablate_cmd->add_option("--settings", ablate_settings, "comma-separated setting list");
    ablate_cmd->add_option("--jobs", ablate_jobs, "parallel workers");
    ablate_cmd->add_option("--episodes", ablate_episodes, "shield evaluation episodes");
    ablate_cmd->add_option("--out", ablate_out, "output directory")->required();
    ablate_cmd->callback([&]() {
        cmd_ablate(ablate_seeds, ablate_steps, ablate_out, ablate_jobs, ablate_settings,
                   ablate_episodes);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("cbfrl");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace cbfrl::cli
