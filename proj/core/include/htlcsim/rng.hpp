#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace htlcsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// mt19937_64 source with explicit distribution transforms. The standard
/// pins the generator output but not the library distributions, so the
/// transforms are spelled out here to make seeded runs reproducible across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Derives an independent stream for a generation stage.
    static Rng substream(std::uint64_t seed, std::uint64_t tag) {
        return Rng(splitmix64(seed ^ splitmix64(tag)));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n), unbiased. n must be positive.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Box-Muller; two uniforms per draw.
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + sigma * z;
    }

    /// Inversion; rate is events per unit time.
    double exponential(double rate) {
        const double u = 1.0 - uniform01();  // (0, 1]
        return -std::log(u) / rate;
    }

    /// Knuth's product method; fine for the moderate means used here.
    std::uint64_t poisson(double lambda) {
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace htlcsim
