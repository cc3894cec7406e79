#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cbfrl::cli {

/// Run provenance: the config snapshot, a git-style content hash of the
/// checkpoint, and every file the run emitted (paths relative to the
/// manifest's directory).
struct RunManifest {
    std::string setting;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::string checkpoint_file;
    std::string checkpoint_sha1;
    std::vector<std::string> files;
    double duration_seconds = 0.0;
};

/// SHA-1 of "blob <size>\0<bytes>", the same object id git would assign.
std::string git_blob_sha1(const std::string& bytes);
std::string git_blob_sha1_file(const std::string& path);

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

/// Re-hashes the checkpoint and checks all listed files exist. Throws
/// std::runtime_error describing the first mismatch.
void validate_manifest(const std::string& path);

} // namespace cbfrl::cli
