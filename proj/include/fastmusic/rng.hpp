#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fastmusic/types.hpp"

namespace fastmusic {

/// Deterministic random stream. The generator is std::mt19937_64 (bit-exact by
/// the standard) and every distribution below is implemented here rather than
/// taken from <random>, so identical seed + identical call sequence produces
/// identical output on any conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in (0, 1], 53-bit resolution.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// p distinct indices drawn uniformly from [0, m), returned sorted.
    std::vector<Index> sample_without_replacement(Index m, Index p);

    /// Stateless sub-seed derivation (splitmix64 finalizer over seed ^ tag).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fastmusic
