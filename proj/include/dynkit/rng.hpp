#pragma once

#include "dynkit/types.hpp"

#include <cstdint>
#include <random>

namespace dynkit {

/// Portable random stream.
///
/// Engine: std::mt19937_64 (fully specified by the C++ standard). Doubles are
/// built from the top 53 bits of each draw, never through the
/// implementation-defined std:: distributions, so sequences are identical
/// across compilers and platforms. Independent sub-streams are seeded with
/// the SplitMix64 finalizer of (seed, stream).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

    /// Uniform in the box [lower, upper).
    Vec uniform_in(const Vec& lower, const Vec& upper)
    {
        Vec p(lower.size());
        for (Eigen::Index i = 0; i < lower.size(); ++i) p[i] = uniform(lower[i], upper[i]);
        return p;
    }

    /// Uniform in the open Euclidean ball of the given radius (rejection).
    Vec uniform_in_ball(int dimension, double radius)
    {
        Vec u(dimension);
        do {
            for (int i = 0; i < dimension; ++i) u[i] = uniform(-1.0, 1.0);
        } while (u.squaredNorm() >= 1.0);
        return u * radius;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dynkit
