#pragma once

#include "dynkit/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynkit {

enum class PseudoOrbitSource { given, random, drift, splice };

struct PseudoOrbit {
    std::vector<Vec> points;
    double delta = 0.0;
    PseudoOrbitSource source = PseudoOrbitSource::given;
    std::uint64_t rng_seed = 0;
    // splice provenance
    Vec q;
    Vec x0;
    int n0 = 0;
    int n_back = 0;
    int junction = -1;  // index of the last point before the x0 orbit

    std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
};

/// d(f(y_i), y_{i+1}) for each step.
std::vector<double> step_defects(const DynamicalMap& map, const std::vector<Vec>& points);

/// Checks every defect is < delta (== 0 when delta is 0); throws otherwise.
PseudoOrbit make_pseudo_orbit(const DynamicalMap& map, std::vector<Vec> points, double delta,
                              PseudoOrbitSource source = PseudoOrbitSource::given);

/// y_{i+1} = f(y_i) + u_i, u_i uniform in the ball of radius 0.99 delta.
/// Both generators stop after the first point outside the map's window.
PseudoOrbit random_pseudo_orbit(const DynamicalMap& map, const Vec& x0, double delta, int steps, std::uint64_t seed);

/// y_{i+1} = f(y_i) + 0.99 delta e, e a fixed unit vector (seed picks it).
PseudoOrbit drift_pseudo_orbit(const DynamicalMap& map, const Vec& x0, double delta, int steps, std::uint64_t seed);

class NoApproach : public Error {
public:
    explicit NoApproach(double min_distance);
    double min_distance() const noexcept { return min_distance_; }

private:
    double min_distance_;
};

struct SpliceOptions {
    int budget = 10000;   // largest n0 tried
    int n_back = 30;      // backward tail of q (invertible maps only)
    int n_forward = 30;   // steps of the x0 orbit
};

/// Backward tail of q, f^i(q) for i < n0, then f^i(x0) for i <= n_forward,
/// where n0 is the first n with d(f^n(q), x0) < delta. The only defect is
/// d(f^{n0}(q), x0) at the junction.
PseudoOrbit splice_pseudo_orbit(const DynamicalMap& map, const Vec& q, const Vec& x0, double delta,
                                const SpliceOptions& options = {});

struct ShadowOptions {
    int max_seeds = 10000;        // grid seeds are thinned to stay below this
    int descent_iterations = 200;
    bool shooting = true;         // multiple-shooting fallback
    int shooting_iterations = 12;
    int threads = 1;
};

enum class ShadowMethod { grid, descent, shooting };

struct ShadowingResult {
    bool shadowed = false;
    double eps = 0.0;
    double achieved_eps = 0.0;     // best max_i d(y_i, f^i(x)) found
    double search_resolution = 0.0;
    Vec x;                         // best seed (rounded to double)
    std::vector<std::string> seed_digits;  // best seed, 50 significant digits
    ShadowMethod method = ShadowMethod::grid;
    std::size_t seeds_tried = 0;
    std::vector<double> trace;     // d(y_i, f^i(x)) along the orbit of the seed
};

/// Seeds: a grid of spacing `resolution` over the eps-ball around y_0, then
/// coordinate descent from the best one, then (if still above eps) a
/// minimum-norm multiple-shooting correction of the whole sequence. Orbits of
/// the final seed are re-evaluated in 100-digit arithmetic.
ShadowingResult shadow_search(const DynamicalMap& map, const PseudoOrbit& po, double eps, double resolution,
                              const ShadowOptions& options = {});

/// max_i d(y_i, f^i(x)) with the orbit of x followed in 100-digit arithmetic.
std::vector<double> high_precision_trace(const DynamicalMap& map, const std::vector<HighReal>& seed,
                                         const std::vector<Vec>& points);

struct LinearSeedReport {
    Vec seed;
    double unstable_offset = 0.0;
    double stable_offset = 0.0;
    bool expect_divergence = false;
    double max_distance = 0.0;      // over i <= N, by iteration
    double closed_form = 0.0;       // max_i sqrt((a^i du)^2 + (b^i ds)^2)
    double relative_error = 0.0;
    bool pass = false;
};

struct LinearStableReport {
    std::vector<LinearSeedReport> seeds;
    bool pass = true;
};

/// For f = linear(a, b) with |a| > 1 > |b| and x on the stable axis: seeds
/// with unstable offset >= eps must leave the eps-tube around the orbit of x;
/// seeds on the stable axis within eps must stay in it.
LinearStableReport linear_stable_check(const DynamicalMap& map, const Vec& x, double eps, int steps,
                                       const std::vector<Vec>& seeds);

enum class NoiseKind { uniform_ball, constant_drift };

struct ProfileRow {
    double delta = 0.0;
    int trials = 0;
    int successes = 0;
    double success_fraction = 0.0;
    double worst_achieved_eps = 0.0;
};

struct ProfileOptions {
    int steps = 100;
    double resolution = 1e-3;
    NoiseKind noise = NoiseKind::uniform_ball;
    std::optional<Vec> start;   // default: uniform in the map's window
    int threads = 1;
};

std::vector<ProfileRow> shadowing_profile(const DynamicalMap& map, const std::vector<double>& deltas, double eps,
                                          int trials, std::uint64_t seed, const ProfileOptions& options = {});

/// Columns: index, coordinates (x, y, z as needed), defect.
void write_pseudo_orbit_csv(const DynamicalMap& map, const std::vector<Vec>& points, std::ostream& out);
std::vector<Vec> read_pseudo_orbit_csv(std::istream& in, int dimension);

}  // namespace dynkit
