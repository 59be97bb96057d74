#pragma once

#include <cstdint>

namespace primwalk {

/// splitmix64 finalizer. Used both to expand seeds and as the fixed
/// mixing function for per-trial stream derivation (see derive_stream).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// xoshiro256++ 1.0. One stream is owned by exactly one walker; streams
/// are never shared across threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        // Seed expansion by splitmix64, as recommended by the generator's
        // authors. An all-zero state cannot occur.
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Unbiased draw from [0, n) by rejection. n must be nonzero.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

/// The reproducibility contract: trial (or excursion, or grid-cell) number
/// `index` under master seed `master` always draws from
///     RandomStream(mix64(master ^ mix64(index)))
/// independent of thread count and scheduling. This mapping is part of the
/// output format and is fixed forever.
inline RandomStream derive_stream(std::uint64_t master, std::uint64_t index) {
    return RandomStream(mix64(master ^ mix64(index)));
}

} // namespace primwalk
