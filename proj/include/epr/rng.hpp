#pragma once

#include <cmath>
#include <cstdint>

namespace epr {

// Counter-friendly generators used everywhere randomness is needed.
// std::poisson_distribution and friends are implementation-defined, so the
// samplers below are hand-rolled to keep byte-identical output across
// platforms and library versions.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** seeded via splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Derive an independent stream for a grid point or bootstrap replica.
    static Rng for_point(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c, std::uint64_t d) {
        std::uint64_t sm = seed;
        std::uint64_t h = splitmix64(sm);
        sm = h ^ (a * 0x9e3779b97f4a7c15ULL + 1);
        h = splitmix64(sm);
        sm = h ^ (b * 0xc2b2ae3d27d4eb4fULL + 2);
        h = splitmix64(sm);
        sm = h ^ (c * 0x165667b19e3779f9ULL + 3);
        h = splitmix64(sm);
        sm = h ^ (d * 0x27d4eb2f165667c5ULL + 4);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0,1); never returns exactly 0.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        // Marsaglia polar method.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Exponential with unit mean.
    double exponential() { return -std::log(uniform()); }

    std::int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) return poisson_knuth(mean);
        return poisson_ptrs(mean);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::int64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

    // Hormann's PTRS transformed-rejection sampler, valid for mean >= 10.
    std::int64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                k * loglam - mean - std::lgamma(k + 1.0)) {
                return static_cast<std::int64_t>(k);
            }
        }
    }

    std::uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace epr
