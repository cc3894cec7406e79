#include "manifest.hpp"

#include <openssl/sha.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace cbfrl::cli {

std::string git_blob_sha1(const std::string& bytes) {
    std::string blob = "blob " + std::to_string(bytes.size());
    blob.push_back('\0');
    blob += bytes;

    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);

    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned char byte : digest) out << std::setw(2) << static_cast<int>(byte);
    return out.str();
}

std::string git_blob_sha1_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("git_blob_sha1_file: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return git_blob_sha1(buf.str());
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["setting"] = manifest.setting;
    j["seed"] = manifest.seed;
    j["config"] = manifest.config;
    j["checkpoint_file"] = manifest.checkpoint_file;
    j["checkpoint_sha1"] = manifest.checkpoint_sha1;
    j["files"] = manifest.files;
    j["duration_seconds"] = manifest.duration_seconds;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
    json j;
    in >> j;

    RunManifest m;
    m.setting = j.at("setting").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.checkpoint_file = j.at("checkpoint_file").get<std::string>();
    m.checkpoint_sha1 = j.at("checkpoint_sha1").get<std::string>();
    m.files = j.at("files").get<std::vector<std::string>>();
    m.duration_seconds = j.at("duration_seconds").get<double>();
    return m;
}

void validate_manifest(const std::string& path) {
    const RunManifest m = read_manifest(path);
    const fs::path dir = fs::path(path).parent_path();

    for (const std::string& file : m.files) {
        if (!fs::exists(dir / file)) {
            throw std::runtime_error("manifest lists missing file " + file);
        }
    }
    const std::string actual = git_blob_sha1_file((dir / m.checkpoint_file).string());
    if (actual != m.checkpoint_sha1) {
        throw std::runtime_error("checkpoint hash mismatch: manifest " + m.checkpoint_sha1 +
                                 ", file " + actual);
    }
}

} // namespace cbfrl::cli
