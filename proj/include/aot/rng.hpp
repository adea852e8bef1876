// SPDX-License-Identifier: MIT
//
// Counter-based deterministic random source. Every draw is a pure function
// of (seed, stream, counter), so identical triples reproduce identical
// values across runs and platforms, samplers can be cloned onto disjoint
// streams for independent substreams, and no hidden global state exists.
#pragma once

#include <cstdint>

#include "aot/numerics.hpp"

namespace aot {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of words into one well-mixed word.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

template <typename... Rest>
std::uint64_t stream_hash(std::uint64_t first, Rest... rest) {
    std::uint64_t h = splitmix64(first);
    ((h = hash_combine(h, static_cast<std::uint64_t>(rest))), ...);
    return h;
}

/// Value-like sampler: (seed, stream) identify the stream, an internal
/// counter advances through it. Copy + `with_stream` is the sanctioned way
/// to branch independent substreams; a single instance is not shared.
class SeededSampler {
public:
    explicit SeededSampler(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    [[nodiscard]] SeededSampler with_stream(std::uint64_t stream) const {
        return SeededSampler(seed_, stream);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() {
        std::uint64_t h = splitmix64(seed_);
        h = hash_combine(h, stream_);
        h = hash_combine(h, counter_++);
        return h;
    }

    /// Uniform draw strictly inside (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal draw via the inverse CDF; exact stream stability.
    double next_normal() { return normal_quantile(next_uniform()); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace aot
