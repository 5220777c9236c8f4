#include "dynkit/system.hpp"

#include "dynkit/rng.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>

namespace dynkit {

namespace {

double spectral_norm(const Mat& m)
{
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
    return svd.singularValues()(0);
}

std::array<bool, kMaxDimension> no_periodic() { return {}; }

Domain square_window(double lo, double hi, int dimension)
{
    return Domain(Vec::Constant(dimension, lo), Vec::Constant(dimension, hi), no_periodic());
}

void require_window_dimension(const Domain& window, int dimension)
{
    if (window.dimension() != dimension) throw Error("map window has the wrong dimension");
}

#define DYNKIT_DISPATCH_IMAGE                                                                  \
    void apply(const double* x, double* y, Direction d) const override { image(x, y, d); }    \
    void apply_high(const HighReal* x, HighReal* y, Direction d) const override { image(x, y, d); }

class CatMap final : public DynamicalMap {
public:
    CatMap() : DynamicalMap(make_spec()) {}

    Mat jacobian(const Vec&) const override
    {
        Mat j(2, 2);
        j << 2, 1, 1, 1;
        return j;
    }

private:
    static MapSpec make_spec()
    {
        MapSpec s;
        s.name = "cat";
        s.dimension = 2;
        s.volume_preserving = true;
        s.lipschitz_bound = (3.0 + std::sqrt(5.0)) / 2.0;
        s.derivative_bound = Mat(2, 2);
        s.derivative_bound << 2, 1, 1, 1;
        s.domain = Domain::unit_torus(2);
        return s;
    }

    template <class T>
    static void image(const T* x, T* y, Direction d)
    {
        if (d == Direction::forward) {
            y[0] = 2 * x[0] + x[1];
            y[1] = x[0] + x[1];
        } else {
            y[0] = x[0] - x[1];
            y[1] = 2 * x[1] - x[0];
        }
    }
    DYNKIT_DISPATCH_IMAGE
};

class StandardMap final : public DynamicalMap {
public:
    explicit StandardMap(double k) : DynamicalMap(make_spec(k)), k_(k) {}

    Mat jacobian(const Vec& p) const override
    {
        const double c = k_ * std::cos(2.0 * M_PI * p[0]);
        Mat j(2, 2);
        j << 1.0 + c, 1.0, c, 1.0;
        return j;
    }

private:
    static MapSpec make_spec(double k)
    {
        MapSpec s;
        s.name = "standard";
        s.parameters = {{"K", k}};
        s.dimension = 2;
        s.volume_preserving = true;
        Mat plus(2, 2), minus(2, 2);
        plus << 1.0 + k, 1.0, k, 1.0;
        minus << 1.0 - k, 1.0, -k, 1.0;
        // The norm is convex in cos(2 pi x), so the extremes bound it.
        s.lipschitz_bound = std::max(spectral_norm(plus), spectral_norm(minus));
        s.derivative_bound = Mat(2, 2);
        s.derivative_bound << 1.0 + std::abs(k), 1.0, std::abs(k), 1.0;
        s.domain = Domain::unit_torus(2);
        return s;
    }

    template <class T>
    void image(const T* x, T* y, Direction d) const
    {
        using std::sin;
        const T two_pi = boost::math::constants::two_pi<T>();
        const T kick_scale = T(k_) / two_pi;
        if (d == Direction::forward) {
            const T kick = kick_scale * sin(two_pi * x[0]);
            y[1] = x[1] + kick;
            y[0] = x[0] + y[1];
        } else {
            y[0] = x[0] - x[1];
            y[1] = x[1] - kick_scale * sin(two_pi * y[0]);
        }
    }
    DYNKIT_DISPATCH_IMAGE

    double k_;
};

class TranslationMap final : public DynamicalMap {
public:
    explicit TranslationMap(Domain window) : DynamicalMap(make_spec(std::move(window))) {}

    Mat jacobian(const Vec&) const override { return Mat::Identity(2, 2); }

private:
    static MapSpec make_spec(Domain window)
    {
        require_window_dimension(window, 2);
        MapSpec s;
        s.name = "translation";
        s.dimension = 2;
        s.volume_preserving = true;
        s.lipschitz_bound = 1.0;
        s.derivative_bound = Mat::Identity(2, 2);
        s.domain = std::move(window);
        return s;
    }

    template <class T>
    static void image(const T* x, T* y, Direction d)
    {
        y[0] = d == Direction::forward ? T(x[0] + 1) : T(x[0] - 1);
        y[1] = x[1];
    }
    DYNKIT_DISPATCH_IMAGE
};

class LinearMap final : public DynamicalMap {
public:
    LinearMap(double a, double b, Domain window) : DynamicalMap(make_spec(a, b, std::move(window))), a_(a), b_(b) {}

    Mat jacobian(const Vec&) const override
    {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = a_;
        j(1, 1) = b_;
        return j;
    }

private:
    static MapSpec make_spec(double a, double b, Domain window)
    {
        require_window_dimension(window, 2);
        MapSpec s;
        s.name = "linear";
        s.parameters = {{"a", a}, {"b", b}};
        s.dimension = 2;
        s.has_inverse = a != 0.0 && b != 0.0;
        s.volume_preserving = std::abs(std::abs(a * b) - 1.0) < 1e-15;
        s.lipschitz_bound = std::max(std::abs(a), std::abs(b));
        s.derivative_bound = Mat::Zero(2, 2);
        s.derivative_bound(0, 0) = std::abs(a);
        s.derivative_bound(1, 1) = std::abs(b);
        s.domain = std::move(window);
        return s;
    }

    template <class T>
    void image(const T* x, T* y, Direction d) const
    {
        if (d == Direction::forward) {
            y[0] = T(a_) * x[0];
            y[1] = T(b_) * x[1];
        } else {
            y[0] = x[0] / T(a_);
            y[1] = x[1] / T(b_);
        }
    }
    DYNKIT_DISPATCH_IMAGE

    double a_;
    double b_;
};

class ContractionMap final : public DynamicalMap {
public:
    ContractionMap(double c, Domain window) : DynamicalMap(make_spec(c, std::move(window))), c_(c) {}

    Mat jacobian(const Vec&) const override { return Mat::Identity(dimension(), dimension()) * c_; }

private:
    static MapSpec make_spec(double c, Domain window)
    {
        if (!(c > 0.0 && c < 1.0)) throw Error("contraction: c must lie in (0, 1)");
        MapSpec s;
        s.name = "contraction";
        s.dimension = window.dimension();
        s.parameters = {{"c", c}, {"dimension", static_cast<double>(s.dimension)}};
        s.lipschitz_bound = c;
        s.derivative_bound = Mat::Identity(s.dimension, s.dimension) * c;
        s.domain = std::move(window);
        return s;
    }

    template <class T>
    void image(const T* x, T* y, Direction d) const
    {
        for (int i = 0; i < dimension(); ++i) y[i] = d == Direction::forward ? T(x[i] * c_) : T(x[i] / c_);
    }
    DYNKIT_DISPATCH_IMAGE

    double c_;
};

class ShearMap final : public DynamicalMap {
public:
    explicit ShearMap(Domain window) : DynamicalMap(make_spec(std::move(window))) {}

    Mat jacobian(const Vec&) const override
    {
        Mat j(2, 2);
        j << 1, 1, 0, 1;
        return j;
    }

private:
    static MapSpec make_spec(Domain window)
    {
        require_window_dimension(window, 2);
        MapSpec s;
        s.name = "shear";
        s.dimension = 2;
        s.volume_preserving = true;
        s.lipschitz_bound = (1.0 + std::sqrt(5.0)) / 2.0;
        s.derivative_bound = Mat(2, 2);
        s.derivative_bound << 1, 1, 0, 1;
        s.domain = std::move(window);
        return s;
    }

    template <class T>
    static void image(const T* x, T* y, Direction d)
    {
        y[0] = d == Direction::forward ? T(x[0] + x[1]) : T(x[0] - x[1]);
        y[1] = x[1];
    }
    DYNKIT_DISPATCH_IMAGE
};

class RotationMap final : public DynamicalMap {
public:
    explicit RotationMap(double alpha) : DynamicalMap(make_spec(alpha)), alpha_(alpha) {}

    Mat jacobian(const Vec&) const override { return Mat::Identity(1, 1); }

private:
    static MapSpec make_spec(double alpha)
    {
        MapSpec s;
        s.name = "rotation";
        s.parameters = {{"alpha", alpha}};
        s.dimension = 1;
        s.volume_preserving = true;
        s.lipschitz_bound = 1.0;
        s.derivative_bound = Mat::Identity(1, 1);
        s.domain = Domain::unit_torus(1);
        return s;
    }

    template <class T>
    void image(const T* x, T* y, Direction d) const
    {
        y[0] = d == Direction::forward ? T(x[0] + alpha_) : T(x[0] - alpha_);
    }
    DYNKIT_DISPATCH_IMAGE

    double alpha_;
};

class PolynomialMap final : public DynamicalMap {
public:
    PolynomialMap(MapSpec spec, std::vector<std::vector<PolynomialTerm>> components)
        : DynamicalMap(std::move(spec)), components_(std::move(components))
    {
    }

    void set_bounds(double lipschitz, Mat derivative_bound)
    {
        spec_.lipschitz_bound = lipschitz;
        spec_.derivative_bound = std::move(derivative_bound);
    }

    Mat local_derivative_bound(const Vec& center, const Vec& radius) const override
    {
        const int n = dimension();
        Vec reach(n);
        for (int i = 0; i < n; ++i) reach[i] = std::abs(center[i]) + radius[i];
        Mat bound = Mat::Zero(n, n);
        for (int out = 0; out < n; ++out) {
            for (const PolynomialTerm& term : components_[out]) {
                for (int j = 0; j < n; ++j) {
                    if (term.powers[j] == 0) continue;
                    double m = std::abs(term.coefficient) * term.powers[j];
                    for (int i = 0; i < n; ++i) m *= std::pow(reach[i], i == j ? term.powers[i] - 1 : term.powers[i]);
                    bound(out, j) += m;
                }
            }
        }
        return bound;
    }

private:
    template <class T>
    void image(const T* x, T* y, Direction d) const
    {
        if (d == Direction::inverse) throw InverseUnavailable();
        const int n = dimension();
        for (int out = 0; out < n; ++out) {
            T sum = 0;
            for (const PolynomialTerm& term : components_[out]) {
                T monomial = term.coefficient;
                for (int i = 0; i < n; ++i) {
                    for (int k = 0; k < term.powers[i]; ++k) monomial *= x[i];
                }
                sum += monomial;
            }
            y[out] = sum;
        }
    }
    DYNKIT_DISPATCH_IMAGE

    std::vector<std::vector<PolynomialTerm>> components_;
};

#undef DYNKIT_DISPATCH_IMAGE

}  // namespace

// ---------------------------------------------------------------------------

DynamicalMap::DynamicalMap(MapSpec spec) : spec_(std::move(spec))
{
    if (spec_.dimension < 1 || spec_.dimension > kMaxDimension) throw Error("map: dimension must be 1, 2 or 3");
    if (spec_.domain.dimension() != spec_.dimension) throw Error("map: window dimension mismatch");
}

Vec DynamicalMap::lift(const Vec& p, Direction direction) const
{
    if (p.size() != dimension()) throw Error("map: point has the wrong dimension");
    if (direction == Direction::inverse && !has_inverse()) throw InverseUnavailable();
    Vec out(dimension());
    apply(p.data(), out.data(), direction);
    return out;
}

Vec DynamicalMap::evaluate(const Vec& p, Direction direction) const { return wrap(lift(p, direction)); }

void DynamicalMap::lift_high(std::span<const HighReal> p, std::span<HighReal> out, Direction direction) const
{
    if (static_cast<int>(p.size()) < dimension() || static_cast<int>(out.size()) < dimension())
        throw Error("map: point has the wrong dimension");
    if (direction == Direction::inverse && !has_inverse()) throw InverseUnavailable();
    apply_high(p.data(), out.data(), direction);
}

Mat DynamicalMap::jacobian(const Vec& p) const { return finite_difference_jacobian(*this, p); }

Mat DynamicalMap::local_derivative_bound(const Vec&, const Vec&) const { return spec_.derivative_bound; }

Mat finite_difference_jacobian(const DynamicalMap& map, const Vec& p)
{
    const int n = map.dimension();
    Mat j(n, n);
    for (int col = 0; col < n; ++col) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[col]));
        Vec plus = p;
        Vec minus = p;
        plus[col] += h;
        minus[col] -= h;
        j.col(col) = (map.lift(plus) - map.lift(minus)) / (2.0 * h);
    }
    return j;
}

MapPtr make_cat() { return std::make_shared<CatMap>(); }

MapPtr make_standard(double k) { return std::make_shared<StandardMap>(k); }

MapPtr make_translation(std::optional<Domain> window)
{
    return std::make_shared<TranslationMap>(window.value_or(Domain(make_vec({0.0, -4.0}), make_vec({8.0, 4.0}))));
}

MapPtr make_linear(double a, double b, std::optional<Domain> window)
{
    return std::make_shared<LinearMap>(a, b, window.value_or(square_window(-1.0, 1.0, 2)));
}

MapPtr make_contraction(double c, int dimension, std::optional<Domain> window)
{
    return std::make_shared<ContractionMap>(c, window.value_or(square_window(-1.0, 1.0, dimension)));
}

MapPtr make_shear(std::optional<Domain> window)
{
    return std::make_shared<ShearMap>(window.value_or(square_window(-1.0, 1.0, 2)));
}

MapPtr make_rotation(double alpha) { return std::make_shared<RotationMap>(alpha); }

MapPtr make_polynomial(const PolynomialSpec& poly, std::uint64_t seed)
{
    const int n = poly.window.dimension();
    if (static_cast<int>(poly.components.size()) != n)
        throw Error("polynomial map: need one component per window axis");
    for (const auto& component : poly.components) {
        for (const auto& term : component) {
            int degree = 0;
            for (int i = 0; i < kMaxDimension; ++i) {
                if (term.powers[i] < 0) throw Error("polynomial map: negative exponent");
                if (i >= n && term.powers[i] != 0) throw Error("polynomial map: exponent on a missing axis");
                degree += term.powers[i];
            }
            if (degree > 4) throw Error("polynomial map: degree must be <= 4");
        }
    }
    MapSpec s;
    s.name = poly.name;
    s.dimension = n;
    s.has_inverse = false;
    s.volume_preserving = poly.volume_preserving;
    s.domain = poly.window;
    s.derivative_bound = Mat::Zero(n, n);
    auto map = std::make_shared<PolynomialMap>(s, poly.components);
    const BoundEstimate est = estimate_bounds(*map, poly.window, 4096, seed);
    const double lipschitz = poly.lipschitz_bound.value_or(est.lipschitz);
    Mat bound = est.derivative_bound;
    if (poly.lipschitz_bound) bound = bound.cwiseMax(Mat::Constant(n, n, *poly.lipschitz_bound));
    map->set_bounds(lipschitz, bound);
    return map;
}

MapPtr make_registry_map(std::string_view name, const std::map<std::string, double>& params,
                         std::optional<Domain> window)
{
    auto take = [&](const char* key, std::optional<double> fallback) -> double {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        if (fallback) return *fallback;
        throw Error(std::string("map '") + std::string(name) + "' needs parameter '" + key + "'");
    };
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : params) {
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) throw Error(std::string("map '") + std::string(name) + "': unknown parameter '" + key + "'");
        }
    };
    if (name == "cat") {
        allow({});
        return make_cat();
    }
    if (name == "standard") {
        allow({"K"});
        return make_standard(take("K", std::nullopt));
    }
    if (name == "translation") {
        allow({});
        return make_translation(window);
    }
    if (name == "linear") {
        allow({"a", "b"});
        return make_linear(take("a", std::nullopt), take("b", std::nullopt), window);
    }
    if (name == "contraction") {
        allow({"c", "dimension"});
        const int dim = window ? window->dimension() : static_cast<int>(take("dimension", 1.0));
        return make_contraction(take("c", std::nullopt), dim, window);
    }
    if (name == "shear") {
        allow({});
        return make_shear(window);
    }
    if (name == "rotation") {
        allow({"alpha"});
        return make_rotation(take("alpha", (std::sqrt(5.0) - 1.0) / 2.0));
    }
    throw Error("unknown map '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

OrbitSegment orbit(const DynamicalMap& map, const Vec& p, int steps)
{
    OrbitSegment seg{p, {}};
    seg.points.reserve(static_cast<std::size_t>(steps) + 1);
    Vec x = map.wrap(p);
    seg.points.push_back(x);
    for (int i = 0; i < steps; ++i) {
        x = map.evaluate(x);
        seg.points.push_back(x);
    }
    return seg;
}

BoundEstimate estimate_bounds(const DynamicalMap& map, const Domain& window, int samples, std::uint64_t seed)
{
    const int n = map.dimension();
    Rng rng(Rng::derive(seed, 0xB0B));
    BoundEstimate est;
    Mat entries = Mat::Zero(n, n);
    for (int s = 0; s < samples; ++s) {
        const Vec p = rng.uniform_in(window.lower(), window.upper());
        const Mat j = map.jacobian(p);
        entries = entries.cwiseMax(j.cwiseAbs());
        est.max_sampled_norm = std::max(est.max_sampled_norm, spectral_norm(j));
    }
    est.lipschitz = 1.5 * est.max_sampled_norm;
    est.derivative_bound = 1.5 * entries;
    return est;
}

VolumeReport volume_check(const DynamicalMap& map, int samples, double tol, std::uint64_t seed)
{
    if (samples < 1) throw Error("volume_check: samples must be >= 1");
    Rng rng(Rng::derive(seed, 0x70));
    VolumeReport report;
    report.samples = samples;
    const Domain& window = map.domain();
    for (int s = 0; s < samples; ++s) {
        const Vec p = rng.uniform_in(window.lower(), window.upper());
        const double det = map.jacobian(p).determinant();
        report.max_deviation = std::max(report.max_deviation, std::abs(std::abs(det) - 1.0));
    }
    report.pass = report.max_deviation <= tol;
    return report;
}

LagrangeResult lagrange_probe(const DynamicalMap& map, const Vec& p, double escape_radius, int n_max)
{
    if (!(escape_radius > 0.0)) throw Error("lagrange_probe: escape radius must be positive");
    OrbitSegment seg{p, {}};
    Vec x = map.wrap(p);
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) x = map.evaluate(x);
        if (x.norm() >= escape_radius) return Escaped{n, x};
        seg.points.push_back(x);
    }
    return Bounded{std::move(seg)};
}

std::optional<Vec> inverse_newton(const DynamicalMap& map, const Vec& y, const Vec& guess, double tol, int max_iter)
{
    Vec x = guess;
    for (int it = 0; it < max_iter; ++it) {
        const Vec residual = map.displacement(y, map.lift(x));
        if (residual.norm() <= tol) return x;
        const Mat j = map.jacobian(x);
        Eigen::MatrixXd jd = j;
        Eigen::VectorXd r = residual;
        const Eigen::VectorXd step = jd.colPivHouseholderQr().solve(r);
        if (!step.allFinite()) return std::nullopt;
        x -= Vec(step);
    }
    if (map.displacement(y, map.lift(x)).norm() <= tol) return x;
    return std::nullopt;
}

}  // namespace dynkit
