#include "dynkit/shadowing.hpp"

#include "dynkit/parallel.hpp"
#include "dynkit/rng.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dynkit {

namespace {

using HighPoint = std::vector<HighReal>;

HighPoint to_high(const Vec& v)
{
    HighPoint h(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) h[i] = v[i];
    return h;
}

Vec to_double(const HighPoint& h)
{
    Vec v(static_cast<Eigen::Index>(h.size()));
    for (std::size_t i = 0; i < h.size(); ++i) v[static_cast<Eigen::Index>(i)] = static_cast<double>(h[i]);
    return v;
}

void min_image_high(const Domain& domain, HighPoint& r)
{
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!domain.periodic(static_cast<int>(i))) continue;
        const HighReal period = domain.extent(static_cast<int>(i));
        r[i] -= period * boost::multiprecision::round(r[i] / period);
    }
}

void wrap_high(const Domain& domain, HighPoint& x)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!domain.periodic(static_cast<int>(i))) continue;
        const HighReal lower = domain.lower()[static_cast<Eigen::Index>(i)];
        const HighReal period = domain.extent(static_cast<int>(i));
        x[i] -= period * boost::multiprecision::floor((x[i] - lower) / period);
    }
}

HighPoint step_high(const DynamicalMap& map, const HighPoint& x)
{
    HighPoint y(x.size());
    map.lift_high(x, y);
    wrap_high(map.domain(), y);
    return y;
}

HighReal norm_high(const HighPoint& r)
{
    HighReal s = 0;
    for (const HighReal& v : r) s += v * v;
    return boost::multiprecision::sqrt(s);
}

/// max_i d(y_i, f^i(x)) in double, abandoning once above `bound`.
double orbit_cost(const DynamicalMap& map, const Vec& x, const std::vector<Vec>& ys, double bound)
{
    Vec w = map.wrap(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (i > 0) w = map.evaluate(w);
        const double d = map.distance(w, ys[i]);
        if (!(d <= bound)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, d);
    }
    return worst;
}

std::vector<std::string> digits_of(const HighPoint& h)
{
    std::vector<std::string> out;
    for (const HighReal& v : h) out.push_back(v.str(50, std::ios_base::scientific));
    return out;
}

/// Minimum-norm Newton correction of the whole sequence onto a true orbit:
/// solve g_i(z) = f(z_i) - z_{i+1} = 0 with steps dz = -M^T (M M^T)^{-1} g.
HighPoint multiple_shooting(const DynamicalMap& map, const std::vector<Vec>& ys, int iterations)
{
    const int d = map.dimension();
    const std::size_t n = ys.size() - 1;
    std::vector<HighPoint> z;
    z.reserve(ys.size());
    for (const Vec& y : ys) z.push_back(to_high(map.wrap(y)));
    if (n == 0) return z[0];

    const auto rows = static_cast<Eigen::Index>(n) * d;
    const HighReal stop("1e-90");
    for (int it = 0; it < iterations; ++it) {
        std::vector<HighPoint> g(n);
        HighReal worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            HighPoint fz(static_cast<std::size_t>(d));
            map.lift_high(z[i], fz);
            for (int k = 0; k < d; ++k) fz[k] -= z[i + 1][k];
            min_image_high(map.domain(), fz);
            for (int k = 0; k < d; ++k) worst = std::max(worst, HighReal(boost::multiprecision::abs(fz[k])));
            g[i] = std::move(fz);
        }
        if (worst < stop) break;

        std::vector<Mat> jac(n);
        for (std::size_t i = 0; i < n; ++i) jac[i] = map.jacobian(to_double(z[i]));

        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(static_cast<std::size_t>(n) * d * d * 3);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Index base = static_cast<Eigen::Index>(i) * d;
            const Mat diag = jac[i] * jac[i].transpose() + Mat::Identity(d, d);
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < d; ++c) entries.emplace_back(base + r, base + c, diag(r, c));
            }
            if (i + 1 < n) {
                // (M M^T)_{i,i+1} = -J_{i+1}^T
                for (int r = 0; r < d; ++r) {
                    for (int c = 0; c < d; ++c) {
                        entries.emplace_back(base + r, base + d + c, -jac[i + 1](c, r));
                        entries.emplace_back(base + d + c, base + r, -jac[i + 1](c, r));
                    }
                }
            }
        }
        Eigen::SparseMatrix<double> normal(rows, rows);
        normal.setFromTriplets(entries.begin(), entries.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
        if (solver.info() != Eigen::Success) break;

        // Scale the right-hand side so tiny residuals keep full relative precision.
        const double scale = static_cast<double>(worst);
        Eigen::VectorXd rhs(rows);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) rhs[static_cast<Eigen::Index>(i) * d + k] = static_cast<double>(g[i][k] / scale);
        }
        const Eigen::VectorXd lambda = solver.solve(rhs);
        if (solver.info() != Eigen::Success || !lambda.allFinite()) break;

        for (std::size_t i = 0; i <= n; ++i) {
            Vec delta = Vec::Zero(d);
            if (i < n) delta -= jac[i].transpose() * lambda.segment(static_cast<Eigen::Index>(i) * d, d);
            if (i > 0) delta += lambda.segment(static_cast<Eigen::Index>(i - 1) * d, d);
            for (int k = 0; k < d; ++k) z[i][k] += HighReal(delta[k]) * scale;
            wrap_high(map.domain(), z[i]);
        }
    }
    return z[0];
}

}  // namespace

std::vector<double> step_defects(const DynamicalMap& map, const std::vector<Vec>& points)
{
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) out.push_back(map.distance(map.evaluate(points[i]), points[i + 1]));
    return out;
}

PseudoOrbit make_pseudo_orbit(const DynamicalMap& map, std::vector<Vec> points, double delta, PseudoOrbitSource source)
{
    if (!(delta >= 0.0)) throw Error("pseudo-orbit: delta must be >= 0");
    if (points.empty()) throw Error("pseudo-orbit: no points");
    for (const Vec& p : points) {
        if (p.size() != map.dimension()) throw Error("pseudo-orbit: point has the wrong dimension");
    }
    const std::vector<double> defects = step_defects(map, points);
    for (std::size_t i = 0; i < defects.size(); ++i) {
        const bool ok = delta == 0.0 ? defects[i] == 0.0 : defects[i] < delta;
        if (!ok) {
            std::ostringstream msg;
            msg << "pseudo-orbit: step " << i << " has defect " << defects[i] << " >= delta " << delta;
            throw Error(msg.str());
        }
    }
    PseudoOrbit po;
    po.points = std::move(points);
    po.delta = delta;
    po.source = source;
    return po;
}

PseudoOrbit random_pseudo_orbit(const DynamicalMap& map, const Vec& x0, double delta, int steps, std::uint64_t seed)
{
    if (!(delta >= 0.0)) throw Error("pseudo-orbit: delta must be >= 0");
    if (steps < 0) throw Error("pseudo-orbit: steps must be >= 0");
    Rng rng(seed);
    std::vector<Vec> pts{map.wrap(x0)};
    for (int i = 0; i < steps && map.domain().contains(pts.back()); ++i) {
        const Vec u = rng.uniform_in_ball(map.dimension(), 0.99 * delta);
        pts.push_back(map.wrap(map.lift(pts.back()) + u));
    }
    PseudoOrbit po = make_pseudo_orbit(map, std::move(pts), delta, PseudoOrbitSource::random);
    po.rng_seed = seed;
    return po;
}

PseudoOrbit drift_pseudo_orbit(const DynamicalMap& map, const Vec& x0, double delta, int steps, std::uint64_t seed)
{
    if (!(delta >= 0.0)) throw Error("pseudo-orbit: delta must be >= 0");
    if (steps < 0) throw Error("pseudo-orbit: steps must be >= 0");
    Rng rng(seed);
    Vec e = rng.uniform_in_ball(map.dimension(), 1.0);
    while (e.norm() < 1e-3) e = rng.uniform_in_ball(map.dimension(), 1.0);
    e *= 0.99 * delta / e.norm();
    std::vector<Vec> pts{map.wrap(x0)};
    for (int i = 0; i < steps && map.domain().contains(pts.back()); ++i) pts.push_back(map.wrap(map.lift(pts.back()) + e));
    PseudoOrbit po = make_pseudo_orbit(map, std::move(pts), delta, PseudoOrbitSource::drift);
    po.rng_seed = seed;
    return po;
}

NoApproach::NoApproach(double min_distance)
    : Error("no approach: closest forward iterate of q stays at distance " + std::to_string(min_distance)),
      min_distance_(min_distance)
{
}

PseudoOrbit splice_pseudo_orbit(const DynamicalMap& map, const Vec& q, const Vec& x0, double delta,
                                const SpliceOptions& options)
{
    if (!(delta > 0.0)) throw Error("splice: delta must be > 0");
    if (options.budget < 0 || options.n_back < 0 || options.n_forward < 0) throw Error("splice: negative step count");
    const Vec qw = map.wrap(q);
    const Vec xw = map.wrap(x0);

    std::vector<Vec> head{qw};
    int n0 = -1;
    double closest = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= options.budget; ++n) {
        if (n > 0) head.push_back(map.evaluate(head.back()));
        const double d = map.distance(head.back(), xw);
        closest = std::min(closest, d);
        if (d < delta) {
            n0 = n;
            break;
        }
        if (!head.back().allFinite()) break;
    }
    if (n0 < 0) throw NoApproach(closest);
    head.pop_back();  // keep f^i(q) for i < n0

    const int n_back = map.has_inverse() ? options.n_back : 0;
    std::vector<Vec> tail;
    Vec b = qw;
    for (int k = 0; k < n_back; ++k) {
        b = map.evaluate(b, Direction::inverse);
        tail.push_back(b);
    }
    std::vector<Vec> pts(tail.rbegin(), tail.rend());
    pts.insert(pts.end(), head.begin(), head.end());
    const int junction = static_cast<int>(pts.size()) - 1;
    Vec x = xw;
    pts.push_back(x);
    for (int i = 0; i < options.n_forward; ++i) {
        x = map.evaluate(x);
        pts.push_back(x);
    }
    PseudoOrbit po = make_pseudo_orbit(map, std::move(pts), delta, PseudoOrbitSource::splice);
    po.q = qw;
    po.x0 = xw;
    po.n0 = n0;
    po.n_back = n_back;
    po.junction = junction;
    return po;
}

std::vector<double> high_precision_trace(const DynamicalMap& map, const std::vector<HighReal>& seed,
                                         const std::vector<Vec>& points)
{
    std::vector<double> trace;
    trace.reserve(points.size());
    HighPoint w = seed;
    wrap_high(map.domain(), w);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) w = step_high(map, w);
        HighPoint r = to_high(points[i]);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = w[k] - r[k];
        min_image_high(map.domain(), r);
        trace.push_back(static_cast<double>(norm_high(r)));
    }
    return trace;
}

ShadowingResult shadow_search(const DynamicalMap& map, const PseudoOrbit& po, double eps, double resolution,
                              const ShadowOptions& options)
{
    if (!(eps > 0.0)) throw Error("shadow_search: eps must be > 0");
    if (!(resolution > 0.0)) throw Error("shadow_search: resolution must be > 0");
    if (po.points.empty()) throw Error("shadow_search: empty pseudo-orbit");
    const int d = map.dimension();
    const std::vector<Vec>& ys = po.points;
    const Vec& y0 = ys.front();

    // (a) grid seeds
    double res = resolution;
    auto half_width = [&] { return static_cast<long>(std::floor(eps / res)); };
    auto seed_count = [&] { return std::pow(2.0 * half_width() + 1.0, d); };
    while (seed_count() > options.max_seeds) res *= 2.0;
    const long m = half_width();
    std::vector<Vec> seeds;
    {
        std::array<long, kMaxDimension> k{};
        for (int i = 0; i < d; ++i) k[i] = -m;
        while (true) {
            Vec offset(d);
            for (int i = 0; i < d; ++i) offset[i] = static_cast<double>(k[i]) * res;
            if (offset.norm() <= eps) seeds.push_back(y0 + offset);
            int axis = 0;
            while (axis < d && ++k[axis] > m) k[axis++] = -m;
            if (axis == d) break;
        }
    }
    const std::size_t chunks = chunk_count(seeds.size(), options.threads);
    std::vector<std::pair<double, std::size_t>> local(chunks, {std::numeric_limits<double>::infinity(), 0});
    parallel_chunks(seeds.size(), options.threads, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& best = local[chunk];
        for (std::size_t s = begin; s < end; ++s) {
            const double c = orbit_cost(map, seeds[s], ys, best.first);
            if (c < best.first) best = {c, s};
        }
    });
    auto best = *std::min_element(local.begin(), local.end());
    Vec x = std::isfinite(best.first) ? seeds[best.second] : y0;
    double cost = best.first;

    // (b) coordinate descent
    ShadowMethod method = ShadowMethod::grid;
    if (cost > 0.0) {
        double step = res;
        for (int it = 0; it < options.descent_iterations && step > 0.0; ++it) {
            bool improved = false;
            for (int axis = 0; axis < d; ++axis) {
                for (double sign : {1.0, -1.0}) {
                    Vec cand = x;
                    cand[axis] += sign * step;
                    const double c = orbit_cost(map, cand, ys, cost);
                    if (c < cost) {
                        cost = c;
                        x = cand;
                        improved = true;
                        method = ShadowMethod::descent;
                    }
                }
            }
            if (!improved) step /= 2.0;
        }
    }

    ShadowingResult result;
    result.eps = eps;
    result.search_resolution = res;
    result.seeds_tried = seeds.size();
    HighPoint seed = to_high(x);
    result.trace = high_precision_trace(map, seed, ys);
    result.achieved_eps = *std::max_element(result.trace.begin(), result.trace.end());
    result.method = method;

    // (c) multiple shooting
    if (result.achieved_eps > eps && options.shooting) {
        HighPoint z = multiple_shooting(map, ys, options.shooting_iterations);
        std::vector<double> trace = high_precision_trace(map, z, ys);
        const double achieved = *std::max_element(trace.begin(), trace.end());
        if (achieved < result.achieved_eps) {
            seed = std::move(z);
            result.trace = std::move(trace);
            result.achieved_eps = achieved;
            result.method = ShadowMethod::shooting;
        }
    }
    wrap_high(map.domain(), seed);
    result.x = to_double(seed);
    result.seed_digits = digits_of(seed);
    result.shadowed = result.achieved_eps <= eps;
    return result;
}

LinearStableReport linear_stable_check(const DynamicalMap& map, const Vec& x, double eps, int steps,
                                       const std::vector<Vec>& seeds)
{
    const MapSpec& spec = map.spec();
    if (spec.name != "linear") throw Error("linear_stable_check: needs the linear map");
    double a = 0.0, b = 0.0;
    for (const auto& [key, value] : spec.parameters) {
        if (key == "a") a = value;
        if (key == "b") b = value;
    }
    if (!(std::abs(a) > 1.0 && std::abs(b) < 1.0)) throw Error("linear_stable_check: need |a| > 1 > |b|");
    if (x[0] != 0.0) throw Error("linear_stable_check: x must lie on the stable axis");
    if (!(eps > 0.0) || steps < 0) throw Error("linear_stable_check: need eps > 0 and steps >= 0");

    LinearStableReport report;
    for (const Vec& y : seeds) {
        LinearSeedReport r;
        r.seed = y;
        r.unstable_offset = y[0] - x[0];
        r.stable_offset = y[1] - x[1];
        Vec fx = x;
        Vec fy = y;
        for (int i = 0; i <= steps; ++i) {
            if (i > 0) {
                fx = map.evaluate(fx);
                fy = map.evaluate(fy);
            }
            r.max_distance = std::max(r.max_distance, map.distance(fx, fy));
            const double du = std::pow(a, i) * r.unstable_offset;
            const double ds = std::pow(b, i) * r.stable_offset;
            r.closed_form = std::max(r.closed_form, std::hypot(du, ds));
        }
        r.relative_error = r.closed_form == 0.0 ? r.max_distance : std::abs(r.max_distance - r.closed_form) / r.closed_form;
        const bool exact = r.relative_error <= 1e-10;
        r.expect_divergence = std::abs(r.unstable_offset) >= eps;
        if (r.expect_divergence) {
            r.pass = exact && r.max_distance > eps;
        } else if (r.unstable_offset == 0.0 && std::abs(r.stable_offset) <= eps) {
            // |b| < 1: the distance b^i ds never grows, so the bound holds for all i.
            r.pass = exact && r.max_distance <= eps;
        } else {
            r.pass = exact;
        }
        report.pass = report.pass && r.pass;
        report.seeds.push_back(std::move(r));
    }
    return report;
}

std::vector<ProfileRow> shadowing_profile(const DynamicalMap& map, const std::vector<double>& deltas, double eps,
                                          int trials, std::uint64_t seed, const ProfileOptions& options)
{
    if (trials < 1) throw Error("shadowing_profile: trials must be >= 1");
    std::vector<ProfileRow> rows;
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        const double delta = deltas[di];
        std::vector<double> achieved(static_cast<std::size_t>(trials), 0.0);
        std::vector<char> ok(static_cast<std::size_t>(trials), 0);
        parallel_chunks(static_cast<std::size_t>(trials), options.threads,
                        [&](std::size_t begin, std::size_t end, std::size_t) {
                            for (std::size_t t = begin; t < end; ++t) {
                                const std::uint64_t trial_seed = Rng::derive(Rng::derive(seed, di), t);
                                Rng rng(trial_seed);
                                const Vec start = options.start
                                                      ? *options.start
                                                      : rng.uniform_in(map.domain().lower(), map.domain().upper());
                                const PseudoOrbit po =
                                    options.noise == NoiseKind::uniform_ball
                                        ? random_pseudo_orbit(map, start, delta, options.steps, rng.next())
                                        : drift_pseudo_orbit(map, start, delta, options.steps, rng.next());
                                const ShadowingResult r = shadow_search(map, po, eps, options.resolution);
                                achieved[t] = r.achieved_eps;
                                ok[t] = r.shadowed ? 1 : 0;
                            }
                        });
        ProfileRow row;
        row.delta = delta;
        row.trials = trials;
        for (int t = 0; t < trials; ++t) {
            row.successes += ok[t];
            row.worst_achieved_eps = std::max(row.worst_achieved_eps, achieved[t]);
        }
        row.success_fraction = static_cast<double>(row.successes) / trials;
        rows.push_back(row);
    }
    return rows;
}

void write_pseudo_orbit_csv(const DynamicalMap& map, const std::vector<Vec>& points, std::ostream& out)
{
    static constexpr const char* names[] = {"x", "y", "z"};
    out << "index";
    for (int i = 0; i < map.dimension(); ++i) out << ',' << names[i];
    out << ",defect\n";
    const std::vector<double> defects = step_defects(map, points);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << i;
        for (int k = 0; k < map.dimension(); ++k) out << ',' << points[i][k];
        out << ',' << (i == 0 ? 0.0 : defects[i - 1]) << '\n';
    }
}

std::vector<Vec> read_pseudo_orbit_csv(std::istream& in, int dimension)
{
    std::vector<Vec> points;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("index", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (static_cast<int>(values.size()) < dimension + 1) throw Error("pseudo-orbit csv: short row");
        Vec p(dimension);
        for (int k = 0; k < dimension; ++k) p[k] = values[static_cast<std::size_t>(k) + 1];
        points.push_back(p);
    }
    return points;
}

}  // namespace dynkit
