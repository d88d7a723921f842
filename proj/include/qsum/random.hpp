#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace qsum {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of trial `index` in an experiment seeded with `master`.
///
/// Depends only on (master, index), so trials can be evaluated in any order
/// or on any worker and still reproduce the same per-trial randomness.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

// Named randomness streams inside one protocol run. Keeping roles on separate
// streams means, e.g., an attacked run and an honest run with the same seed
// see the same sampling choices by the honest parties.
enum class Stream : std::uint64_t {
    Preparer = 1,  // P1's private choices (decoys, fake positions)
    Parties = 2,   // P2..Pn shared randomness for the correlation check
    Nature = 3,    // measurement outcomes
    Eavesdropper = 4,
    Secrets = 5,   // "random" secrets in scenario files
};

/// Seeded uniform sampler. All randomness in the library goes through this.
///
/// Integer and real draws are computed from raw 64-bit words with fixed
/// formulas (no std distributions), so streams are bit-identical across
/// standard library implementations.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}
    Sampler(std::uint64_t seed, Stream stream)
        : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Sampler::below: bound must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    int below(int bound) { return static_cast<int>(below(static_cast<std::uint64_t>(bound))); }

    bool coin() { return (next() >> 63) != 0; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace qsum
