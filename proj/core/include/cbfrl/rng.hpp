#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cbfrl {

/// Deterministic random stream. A master seed is split into independent
/// named streams (env, net-init, replay, metrics, shield, ...) so each
/// component replays bit-exactly regardless of what the others consume.
///
/// Uniform doubles are produced directly from the top 53 bits of the
/// generator output, so sequences do not depend on the standard library's
/// distribution implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t raw_seed) : eng_(mix(raw_seed)) {}

    RngStream(std::uint64_t master_seed, std::string_view stream_name)
        : eng_(mix(master_seed ^ fnv1a(stream_name))) {}

    RngStream(std::uint64_t master_seed, std::string_view stream_name, std::uint64_t index)
        : eng_(mix(mix(master_seed ^ fnv1a(stream_name)) + index)) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [0, n). Requires n > 0.
    int uniform_int(int n) {
        return static_cast<int>((static_cast<__uint128_t>(eng_()) *
                                 static_cast<__uint128_t>(n)) >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    // splitmix64 finalizer; decorrelates nearby seeds before feeding mt19937_64.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
};

} // namespace cbfrl
