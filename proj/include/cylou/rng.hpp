// Deterministic substream RNG: a master seed plus (scenario, mode, replicate)
// coordinates derive an independent xoshiro256++ stream, so parallel
// replication order can never change the draws.  All variate transforms are
// implemented here (no std::*_distribution: their output is
// implementation-defined and would break bit-exact reproducibility).
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cylou {

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

struct StreamKey {
    uint64_t scenario = 0;
    uint64_t mode = 0;
    uint64_t replicate = 0;
};

class RngStream {
public:
    RngStream(uint64_t master_seed, StreamKey key) {
        uint64_t h = master_seed;
        (void)detail::splitmix64(h);
        h ^= 0xA0761D6478BD642Full * (key.scenario + 1);
        (void)detail::splitmix64(h);
        h ^= 0xE7037ED1A0B428DBull * (key.mode + 1);
        (void)detail::splitmix64(h);
        h ^= 0x8EBC6AF09C88C6E3ull * (key.replicate + 1);
        for (auto& w : s_) w = detail::splitmix64(h);
    }

    uint64_t next_u64() {
        const uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential(1) via inversion.
    double exponential() { return -std::log(uniform01()); }

    /// Standard normal (Box-Muller, one value cached).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(2.0 * exponential());
        const double theta = 2.0 * std::numbers::pi * uniform01();
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    /// Poisson with the given mean (Knuth for small means, normal-rounded
    /// rejection-free approximation would bias: use inversion-by-search for
    /// moderate means, capped by the caller's design).
    uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            uint64_t n = 0;
            double prod = uniform01();
            while (prod > limit) {
                ++n;
                prod *= uniform01();
            }
            return n;
        }
        // split recursively: Poisson(m) = Poisson(m/2) + Poisson(m/2)
        const uint64_t half = poisson(0.5 * mean);
        return half + poisson(mean - 0.5 * mean);
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang, with the standard power boost for
    /// shape < 1.  Deterministic given the stream state.
    double gamma(double shape) {
        if (!(shape > 0.0)) return 0.0;
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x = gaussian();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    uint64_t s_[4] = {};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace cylou
