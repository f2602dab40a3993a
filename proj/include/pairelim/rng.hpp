#pragma once
/*
Counter-based pseudo-random generator (splitmix64).  Each (seed, stream)
pair yields an independent deterministic sequence; replication r of an
experiment uses stream r, so results are reproducible regardless of how
replications are scheduled across threads.
*/

#include <cstdint>

namespace pairelim {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        // Decorrelate seed and stream before merging so that nearby
        // (seed, stream) pairs start in unrelated states.
        state_ = detail::mix64(seed + 0x9E3779B97F4A7C15ULL) ^
                 detail::mix64(detail::mix64(stream) + 0xD1B54A32D192ED03ULL);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), n >= 1.  Multiply-shift keeps this exact
    // and platform independent (no rejection loop, bias < 2^-64).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

  private:
    std::uint64_t state_;
};

}  // namespace pairelim
