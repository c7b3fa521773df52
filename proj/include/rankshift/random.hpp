#pragma once

// Seeded random streams.
//
// std::mt19937_64 is fully specified by the standard, but the std::*_distribution
// adaptors are not, so the transforms below are written out explicitly to keep
// generated pools identical across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rankshift {

// SplitMix64 finalizer; used to derive independent seeds from (seed, stream ids).
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % n;
    }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Standard Gumbel; the open interval keeps both logs finite.
    double gumbel() {
        const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return -std::log(-std::log(u));
    }

    double normal() {
        // Marsaglia polar method; the second variate is discarded so every
        // call consumes a self-contained block of draws.
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }

    // Gamma(shape, 1) by Marsaglia-Tsang, with the shape < 1 boost.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet(alpha) sample of dimension k.
    std::vector<double> dirichlet(std::size_t k, double alpha) {
        std::vector<double> out(k);
        double total = 0.0;
        for (double& v : out) {
            v = gamma(alpha);
            total += v;
        }
        for (double& v : out) v /= total;
        return out;
    }

    // Index drawn with probability proportional to `weights`.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double target = uniform() * total;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = i;
            if (target < weights[i]) return i;
            target -= weights[i];
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rankshift
