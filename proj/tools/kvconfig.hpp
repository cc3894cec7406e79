#pragma once

#include <map>
#include <string>

#include "cbfrl/trainer.hpp"

namespace cbfrl::cli {

/// Flat `key = value` run configuration with '#' comments. Zero
/// dependencies and diff-friendly; serialization is canonical (sorted
/// keys), so parse -> serialize -> parse is the identity.
class KvConfig {
public:
    static KvConfig parse(const std::string& text);
    static KvConfig load_file(const std::string& path);

    std::string serialize() const;

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    const std::string& get(const std::string& key) const;
    long get_long(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Applies recognized keys onto `base`; an unknown key raises
/// std::invalid_argument naming it.
TrainConfig apply_config(const KvConfig& kv, TrainConfig base);

/// Full snapshot of a training configuration, including the setting label.
KvConfig config_to_kv(const TrainConfig& config, const std::string& setting);

} // namespace cbfrl::cli
