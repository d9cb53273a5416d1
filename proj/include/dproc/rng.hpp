#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dproc/errors.hpp"

namespace dproc {

// Deterministic, seedable, splittable 64-bit generator.  The algorithm is
// pinned so trajectories reproduce across platforms and releases:
//
//   - engine: std::mt19937_64 seeded directly with the 64-bit seed (the
//     seeding procedure and output sequence of mt19937_64 are fully
//     specified by the C++ standard);
//   - uniform01(): (engine() >> 11) * 2^-53, a uniform double in [0, 1)
//     with 53 random bits;
//   - derive(i): child seed = splitmix64(seed ^ splitmix64(i + golden)),
//     where golden = 0x9E3779B97F4A7C15 and splitmix64 is the standard
//     finalizer; children are derived from the constructor seed, not the
//     current stream position, so child streams are independent of how
//     much the parent has been consumed.
//
// gaussian() uses Box-Muller and therefore calls the platform libm; it is
// deterministic for a fixed platform but not bit-pinned across libms.  All
// sampling of model trajectories uses only uniform01().
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal deviate (Box-Muller, two uniforms per call).
    double gaussian() {
        const double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Independent child stream number `index`.
    SplitRng derive(std::uint64_t index) const {
        return SplitRng(splitmix64(seed_ ^ splitmix64(index + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// Draws an index from a finite distribution by inverse CDF in index order:
// one uniform u, then the first index i with u < p_0 + ... + p_i wins.  The
// caller is responsible for probabilities that sum to 1; if accumulated
// roundoff leaves u beyond the final cumulative sum, the last index with
// positive probability is returned.
inline std::size_t sample_categorical(const std::vector<double>& probs, SplitRng& rng) {
    if (probs.empty()) {
        throw Error("sample_categorical: empty distribution");
    }
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    bool seen_positive = false;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            last_positive = i;
            seen_positive = true;
        }
        cumulative += probs[i];
        if (u < cumulative) {
            return i;
        }
    }
    if (!seen_positive) {
        throw Error("sample_categorical: all probabilities are zero");
    }
    return last_positive;
}

}  // namespace dproc
