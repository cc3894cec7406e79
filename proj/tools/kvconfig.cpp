#include "kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbfrl::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

KvConfig KvConfig::parse(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

KvConfig KvConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string KvConfig::serialize() const {
    std::ostringstream out;
    for (const auto& [key, value] : entries_) out << key << " = " << value << '\n';
    return out.str();
}

const std::string& KvConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw std::invalid_argument("missing config key '" + key + "'");
    return it->second;
}

long KvConfig::get_long(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + v +
                                    "' as an integer");
    }
}

double KvConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + v +
                                    "' as a number");
    }
}

bool KvConfig::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "' as a bool");
}

TrainConfig apply_config(const KvConfig& kv, TrainConfig base) {
    for (const auto& [key, value] : kv.entries()) {
        if (key == "setting") {
            if (!parse_setting(value)) {
                throw std::invalid_argument("config key 'setting': unknown setting '" + value + "'");
            }
        } else if (key == "total_steps") {
            base.total_steps = kv.get_long(key);
        } else if (key == "gamma") {
            base.gamma = kv.get_double(key);
        } else if (key == "arch") {
            if (value == "mlp") {
                base.arch = Head::kUnbounded;
            } else if (value == "sigmoid") {
                base.arch = Head::kBounded;
            } else {
                throw std::invalid_argument("config key 'arch': expected mlp or sigmoid, got '" +
                                            value + "'");
            }
        } else if (key == "supervised") {
            base.supervised = kv.get_bool(key);
        } else if (key == "explore") {
            base.explore = kv.get_bool(key);
        } else if (key == "lr") {
            base.lr = kv.get_double(key);
        } else if (key == "batch_size") {
            base.batch_size = static_cast<int>(kv.get_long(key));
        } else if (key == "target_update_period") {
            base.target_update_period = static_cast<int>(kv.get_long(key));
        } else if (key == "eps_start") {
            base.eps.start = kv.get_double(key);
        } else if (key == "eps_end") {
            base.eps.end = kv.get_double(key);
        } else if (key == "eps_fraction") {
            base.eps.fraction = kv.get_double(key);
        } else if (key == "unsafe_batch_size") {
            base.unsafe_batch_size = static_cast<int>(kv.get_long(key));
        } else if (key == "supervision_weight") {
            base.supervision_weight = kv.get_double(key);
        } else if (key == "eval_period") {
            base.eval_period = kv.get_long(key);
        } else if (key == "seed") {
            base.seed = static_cast<std::uint64_t>(kv.get_long(key));
        } else if (key == "buffer_capacity") {
            base.buffer_capacity = static_cast<int>(kv.get_long(key));
        } else if (key == "warmup_steps") {
            base.warmup_steps = kv.get_long(key);
        } else if (key == "step_cap") {
            base.step_cap = static_cast<int>(kv.get_long(key));
        } else if (key == "hidden") {
            std::vector<int> sizes;
            std::istringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                try {
                    sizes.push_back(std::stoi(tok));
                } catch (const std::exception&) {
                    throw std::invalid_argument("config key 'hidden': cannot parse '" + value +
                                                "' as a size list");
                }
            }
            if (sizes.empty()) throw std::invalid_argument("config key 'hidden': empty size list");
            base.hidden = std::move(sizes);
        } else if (key == "eval_rollouts") {
            base.eval_rollouts = static_cast<int>(kv.get_long(key));
        } else if (key == "eval_samples") {
            base.eval_samples = static_cast<int>(kv.get_long(key));
        } else if (key == "eval_alpha") {
            base.eval_alpha = kv.get_double(key);
        } else if (key == "eval_R") {
            base.eval_R = kv.get_double(key);
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    return base;
}

KvConfig config_to_kv(const TrainConfig& config, const std::string& setting) {
    KvConfig kv;
    auto num = [](double v) {
        std::ostringstream out;
        out.precision(17);
        out << v;
        return out.str();
    };
    kv.set("setting", setting);
    kv.set("total_steps", std::to_string(config.total_steps));
    kv.set("gamma", num(config.gamma));
    kv.set("arch", config.arch == Head::kBounded ? "sigmoid" : "mlp");
    kv.set("supervised", config.supervised ? "true" : "false");
    kv.set("explore", config.explore ? "true" : "false");
    kv.set("lr", num(config.lr));
    kv.set("batch_size", std::to_string(config.batch_size));
    kv.set("target_update_period", std::to_string(config.target_update_period));
    kv.set("eps_start", num(config.eps.start));
    kv.set("eps_end", num(config.eps.end));
    kv.set("eps_fraction", num(config.eps.fraction));
    kv.set("unsafe_batch_size", std::to_string(config.unsafe_batch_size));
    kv.set("supervision_weight", num(config.supervision_weight));
    kv.set("eval_period", std::to_string(config.eval_period));
    kv.set("seed", std::to_string(config.seed));
    kv.set("buffer_capacity", std::to_string(config.buffer_capacity));
    kv.set("warmup_steps", std::to_string(config.warmup_steps));
    kv.set("step_cap", std::to_string(config.step_cap));
    std::string hidden;
    for (std::size_t i = 0; i < config.hidden.size(); ++i) {
        if (i) hidden += ',';
        hidden += std::to_string(config.hidden[i]);
    }
    kv.set("hidden", hidden);
    kv.set("eval_rollouts", std::to_string(config.eval_rollouts));
    kv.set("eval_samples", std::to_string(config.eval_samples));
    kv.set("eval_alpha", num(config.eval_alpha));
    kv.set("eval_R", num(config.eval_R));
    return kv;
}

} // namespace cbfrl::cli
