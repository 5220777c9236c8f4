#pragma once

#include "dynkit/phase_space.hpp"
#include "dynkit/types.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dynkit {

/// Extended precision used where orbits must be followed through strong
/// expansion (shadowing verification). 100 decimal digits.
using HighReal = boost::multiprecision::cpp_bin_float_100;

enum class Direction { forward, inverse };

struct MapSpec {
    std::string name;
    std::vector<std::pair<std::string, double>> parameters;
    int dimension = 2;
    bool has_inverse = true;
    bool volume_preserving = false;
    /// Bound on the operator 2-norm of Df over the whole phase space.
    double lipschitz_bound = 1.0;
    /// Entrywise bound |Df_ij| <= derivative_bound(i, j); drives box fattening.
    Mat derivative_bound;
    /// Sampling window; its periodic axes are the map's torus directions.
    Domain domain;
};

/// A C^1 map on a window of R^n or a flat torus.
///
/// Evaluation happens on the universal cover ("lift"); `evaluate` wraps the
/// result back into the fundamental domain on periodic axes.
class DynamicalMap {
public:
    explicit DynamicalMap(MapSpec spec);
    virtual ~DynamicalMap() = default;

    DynamicalMap(const DynamicalMap&) = delete;
    DynamicalMap& operator=(const DynamicalMap&) = delete;

    const MapSpec& spec() const noexcept { return spec_; }
    int dimension() const noexcept { return spec_.dimension; }
    bool has_inverse() const noexcept { return spec_.has_inverse; }
    const Domain& domain() const noexcept { return spec_.domain; }

    Vec lift(const Vec& p, Direction direction = Direction::forward) const;
    Vec evaluate(const Vec& p, Direction direction = Direction::forward) const;
    void lift_high(std::span<const HighReal> p, std::span<HighReal> out, Direction direction = Direction::forward) const;

    /// Closed form for registry maps; central differences otherwise.
    virtual Mat jacobian(const Vec& p) const;

    /// Entrywise bound on |Df| over the box center +- radius. Defaults to the
    /// global spec().derivative_bound.
    virtual Mat local_derivative_bound(const Vec& center, const Vec& radius) const;

    Vec wrap(const Vec& p) const { return spec_.domain.wrap(p); }
    Vec displacement(const Vec& a, const Vec& b) const { return spec_.domain.displacement(a, b); }
    double distance(const Vec& a, const Vec& b) const { return spec_.domain.distance(a, b); }

protected:
    virtual void apply(const double* x, double* y, Direction direction) const = 0;
    virtual void apply_high(const HighReal* x, HighReal* y, Direction direction) const = 0;

    MapSpec spec_;
};

using MapPtr = std::shared_ptr<const DynamicalMap>;

class InverseUnavailable : public Error {
public:
    InverseUnavailable() : Error("map has no inverse") {}
};

// Registry ------------------------------------------------------------------

/// (x, y) -> (2x + y, x + y) mod 1.
MapPtr make_cat();
/// (x, y) -> (x + y + K/(2 pi) sin(2 pi x), y + K/(2 pi) sin(2 pi x)) mod 1.
MapPtr make_standard(double k);
/// (x, y) -> (x + 1, y) on the window [0, 8] x [-4, 4].
MapPtr make_translation(std::optional<Domain> window = std::nullopt);
/// (x, y) -> (a x, b y).
MapPtr make_linear(double a, double b, std::optional<Domain> window = std::nullopt);
/// x -> c x on R^n.
MapPtr make_contraction(double c, int dimension = 1, std::optional<Domain> window = std::nullopt);
/// (x, y) -> (x + y, y).
MapPtr make_shear(std::optional<Domain> window = std::nullopt);
/// x -> x + alpha mod 1 on the circle.
MapPtr make_rotation(double alpha);

struct PolynomialTerm {
    double coefficient = 0.0;
    std::array<int, kMaxDimension> powers{};
};

/// User map: each output component is a sum of monomials of degree <= 4.
struct PolynomialSpec {
    std::string name = "polynomial";
    std::vector<std::vector<PolynomialTerm>> components;
    Domain window;
    std::optional<double> lipschitz_bound;
    bool volume_preserving = false;
};

MapPtr make_polynomial(const PolynomialSpec& spec, std::uint64_t seed = 0);

/// Looks up a registry map by name ("cat", "standard", "translation",
/// "linear", "contraction", "shear", "rotation").
MapPtr make_registry_map(std::string_view name, const std::map<std::string, double>& params,
                         std::optional<Domain> window = std::nullopt);

// Diagnostics ---------------------------------------------------------------

struct OrbitSegment {
    Vec base;
    std::vector<Vec> points;  // points[0] == base
};

OrbitSegment orbit(const DynamicalMap& map, const Vec& p, int steps);

Mat finite_difference_jacobian(const DynamicalMap& map, const Vec& p);

struct BoundEstimate {
    double lipschitz = 0.0;
    Mat derivative_bound;
    double max_sampled_norm = 0.0;
};

/// 1.5x the largest sampled Jacobian norm (and entries) over `window`.
BoundEstimate estimate_bounds(const DynamicalMap& map, const Domain& window, int samples, std::uint64_t seed);

struct VolumeReport {
    double max_deviation = 0.0;
    bool pass = false;
    int samples = 0;
};

VolumeReport volume_check(const DynamicalMap& map, int samples, double tol, std::uint64_t seed);

struct Bounded {
    OrbitSegment orbit;
};
struct Escaped {
    int step = 0;
    Vec point;
};
using LagrangeResult = std::variant<Bounded, Escaped>;

/// Escaped at the first step with |f^n(p)| >= escape_radius.
LagrangeResult lagrange_probe(const DynamicalMap& map, const Vec& p, double escape_radius, int n_max);

/// Solves f(x) = y by Newton iteration from `guess` (residual measured with
/// the minimum image on periodic axes).
std::optional<Vec> inverse_newton(const DynamicalMap& map, const Vec& y, const Vec& guess, double tol = 1e-10,
                                  int max_iter = 60);

}  // namespace dynkit
