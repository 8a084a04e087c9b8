#pragma once

#include <cstdint>

namespace tollsim {

// Stateless counter-based generator. Every draw is a pure function of
// (seed, stream, k0, k1), so period t never depends on how many draws
// earlier periods consumed and draws for distinct periods can be taken
// concurrently.
class CounterRng {
public:
    enum Stream : std::uint64_t {
        kMeanVot = 1,
        kValueOfTime = 2,
        kOdResample = 3,
        kOdPick = 4,
        kPeriodType = 5,
        kTollNoise = 6,
        kInstanceGen = 7,
        kGeneric = 8,
    };

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t bits(std::uint64_t stream, std::uint64_t k0 = 0,
                       std::uint64_t k1 = 0) const {
        std::uint64_t h = seed_ + 0x9E3779B97F4A7C15ULL;
        h = mix(h ^ (stream * 0xBF58476D1CE4E5B9ULL));
        h = mix(h ^ (k0 * 0x94D049BB133111EBULL));
        h = mix(h ^ (k1 * 0xD6E8FEB86659FD93ULL));
        return h;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01(std::uint64_t stream, std::uint64_t k0 = 0,
                     std::uint64_t k1 = 0) const {
        return static_cast<double>(bits(stream, k0, k1) >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi, std::uint64_t stream,
                   std::uint64_t k0 = 0, std::uint64_t k1 = 0) const {
        return lo + (hi - lo) * uniform01(stream, k0, k1);
    }

    bool bernoulli(double p, std::uint64_t stream, std::uint64_t k0 = 0,
                   std::uint64_t k1 = 0) const {
        return uniform01(stream, k0, k1) < p;
    }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n, std::uint64_t stream,
                        std::uint64_t k0 = 0, std::uint64_t k1 = 0) const {
        return bits(stream, k0, k1) % n;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
};

} // namespace tollsim
