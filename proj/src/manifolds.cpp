#include "dynkit/manifolds.hpp"

#include "dynkit/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace dynkit {

namespace {

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

double point_segment_distance(const Vec& x, const Vec& a, const Vec& b)
{
    const Vec r = b - a;
    const double len2 = r.squaredNorm();
    double u = len2 > 0.0 ? (x - a).dot(r) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return (a + u * r - x).norm();
}

/// Apply f or f^-1 once on the cover; maps without an inverse use Newton.
Vec cover_step(const DynamicalMap& map, const Vec& x, Direction dir)
{
    if (dir == Direction::forward || map.has_inverse()) return map.lift(x, dir);
    const auto pre = inverse_newton(map, x, x);
    if (!pre) throw Error("inverse Newton failed while growing a stable manifold");
    return *pre;
}

}  // namespace

Mat period_jacobian(const DynamicalMap& map, const Vec& p, int period)
{
    if (period < 1) throw Error("period must be >= 1");
    Mat j = Mat::Identity(map.dimension(), map.dimension());
    Vec x = p;
    for (int k = 0; k < period; ++k) {
        j = map.jacobian(x) * j;
        x = map.lift(x);
    }
    return j;
}

HyperbolicPoint classify_periodic_point(const DynamicalMap& map, const Vec& p, int period, double tol_hyp)
{
    HyperbolicPoint hp;
    hp.point = map.wrap(p);
    hp.period = period;
    Vec x = hp.point;
    for (int k = 0; k < period; ++k) x = map.evaluate(x);
    hp.fixed_residual = map.distance(x, hp.point);

    const Eigen::MatrixXd df = period_jacobian(map, hp.point, period);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(df);
    const int n = static_cast<int>(df.rows());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    const auto values = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(values[a]) != std::abs(values[b])) return std::abs(values[a]) > std::abs(values[b]);
        return values[a].real() > values[b].real();
    });
    hp.real_spectrum = true;
    hp.is_hyperbolic = true;
    hp.eigenvectors = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const std::complex<double> lambda = values[order[k]];
        hp.eigenvalues.push_back(lambda);
        if (std::abs(lambda.imag()) > 1e-12 * std::max(1.0, std::abs(lambda))) hp.real_spectrum = false;
        if (std::abs(std::abs(lambda) - 1.0) <= tol_hyp) hp.is_hyperbolic = false;
        const Eigen::VectorXcd vc = es.eigenvectors().col(order[k]);
        hp.eigen_residual = std::max(hp.eigen_residual, (df.cast<std::complex<double>>() * vc - lambda * vc).norm());
        Eigen::VectorXd v = vc.real();
        if (v.norm() > 0.0) v.normalize();
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (v[big] < 0.0) v = -v;
        hp.eigenvectors.col(k) = v;
    }
    return hp;
}

std::vector<HyperbolicPoint> find_periodic_points(const DynamicalMap& map, int period, const Grid& grid,
                                                  double tol_fix, double tol_hyp, int threads)
{
    if (period < 1) throw Error("find_periodic_points: period must be >= 1");
    if (!(tol_fix > 0.0)) throw Error("find_periodic_points: tol_fix must be > 0");
    if (grid.dimension() != map.dimension()) throw Error("find_periodic_points: dimension mismatch");
    const std::uint32_t n = grid.box_count();
    std::vector<std::optional<Vec>> roots(n);
    const int d = map.dimension();

    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t b = begin; b < end; ++b) {
            Vec x = grid.box_geometry(BoxId{static_cast<std::uint32_t>(b)}).center;
            for (int it = 0; it < 60; ++it) {
                Vec y = x;
                for (int k = 0; k < period; ++k) y = map.evaluate(y);
                const Vec g = map.displacement(x, y);
                if (!g.allFinite()) break;
                if (g.norm() <= 0.01 * tol_fix) break;
                const Eigen::MatrixXd jg = period_jacobian(map, x, period) - Mat::Identity(d, d);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(jg, Eigen::ComputeFullU | Eigen::ComputeFullV);
                svd.setThreshold(1e-10);
                const Eigen::VectorXd step = svd.solve(Eigen::VectorXd(g));
                if (!step.allFinite()) break;
                x = map.wrap(x - Vec(step));
            }
            if (!x.allFinite() || !map.domain().contains(x)) continue;
            Vec y = x;
            for (int k = 0; k < period; ++k) y = map.evaluate(y);
            if (map.distance(x, y) <= tol_fix) roots[b] = map.wrap(x);
        }
    });

    std::vector<HyperbolicPoint> out;
    for (const auto& r : roots) {
        if (!r) continue;
        bool duplicate = false;
        for (const auto& hp : out) {
            if (map.distance(hp.point, *r) <= 10.0 * tol_fix) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.push_back(classify_periodic_point(map, *r, period, tol_hyp));
    }
    return out;
}

// ---------------------------------------------------------------------------

ManifoldPolyline::ManifoldPolyline(MapPtr map, HyperbolicPoint anchor, ManifoldSide side, int branch, double r0)
    : map_(std::move(map)), anchor_(std::move(anchor)), side_(side), branch_(branch), r0_(r0)
{
    if (map_->dimension() != 2) throw Error("manifolds: only 2D maps are supported");
    if (branch_ != 1 && branch_ != -1) throw Error("manifolds: branch must be +1 or -1");
    if (!anchor_.is_hyperbolic) throw Error("manifolds: anchor is not hyperbolic");
    if (!anchor_.real_spectrum) throw Error("manifolds: no real eigendirection");
    const std::size_t k = side_ == ManifoldSide::unstable ? 0 : anchor_.eigenvalues.size() - 1;
    const double lambda = anchor_.eigenvalues[k].real();
    const bool available = side_ == ManifoldSide::unstable ? std::abs(lambda) > 1.0 : std::abs(lambda) < 1.0;
    if (!available) throw Error("manifolds: requested side unavailable");
    direction_ = anchor_.eigenvectors.col(static_cast<Eigen::Index>(k));
    const int doubling = lambda < 0.0 ? 2 : 1;
    steps_ = anchor_.period * doubling;
    const double growth = std::pow(std::abs(lambda), doubling);
    mu_ = side_ == ManifoldSide::unstable ? growth : 1.0 / growth;
}

Vec ManifoldPolyline::step(const Vec& x) const
{
    const Direction dir = side_ == ManifoldSide::unstable ? Direction::forward : Direction::inverse;
    Vec y = x;
    for (int i = 0; i < steps_; ++i) y = cover_step(*map_, y, dir);
    return y;
}

Vec ManifoldPolyline::point_at(double t) const
{
    if (t < 0.0) throw Error("manifolds: negative parameter");
    const double k = std::floor(t);
    Vec x = anchor_.point + branch_ * r0_ * std::pow(mu_, t - k) * direction_;
    for (long i = 0; i < static_cast<long>(k); ++i) x = step(x);
    return x;
}

Vec ManifoldPolyline::at_arclength(double s) const
{
    if (vertices.empty()) throw Error("manifolds: empty polyline");
    if (s <= 0.0) return vertices.front();
    if (s >= length()) return vertices.back();
    const auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - arclength.begin());
    const double u = (s - arclength[i - 1]) / (arclength[i] - arclength[i - 1]);
    return vertices[i - 1] + u * (vertices[i] - vertices[i - 1]);
}

ManifoldPolyline grow_manifold(MapPtr map, const HyperbolicPoint& hp, ManifoldSide side, double target_arclength,
                               const GrowOptions& options)
{
    if (!(target_arclength > 0.0)) throw Error("grow_manifold: target arclength must be > 0");
    if (!(options.max_seg > 0.0)) throw Error("grow_manifold: max_seg must be > 0");
    double r0 = options.r0;
    if (r0 <= 0.0) {
        const Domain& dom = map->domain();
        r0 = 1e-6 * std::max(dom.extent(0), dom.extent(1));
    }
    ManifoldPolyline poly(std::move(map), hp, side, options.branch, r0);
    poly.vertices.push_back(hp.point);
    poly.params.push_back(-std::numeric_limits<double>::infinity());
    poly.arclength.push_back(0.0);
    poly.vertices.push_back(poly.point_at(0.0));
    poly.params.push_back(0.0);
    poly.arclength.push_back((poly.vertices[1] - poly.vertices[0]).norm());

    constexpr std::size_t kMaxVertices = 20'000'000;
    double t = 0.0;
    double dt = 0.05;
    while (poly.length() < target_arclength) {
        if (poly.vertices.size() >= kMaxVertices) throw Error("grow_manifold: vertex budget exhausted");
        const double t1 = t + dt;
        const Vec q = poly.point_at(t1);
        if (!q.allFinite()) throw Error("grow_manifold: orbit left the representable range");
        const Vec& last = poly.vertices.back();
        const Vec& prev = poly.vertices[poly.vertices.size() - 2];
        const Vec seg = q - last;
        const Vec before = last - prev;
        const double gap = seg.norm();
        double turn = 0.0;
        if (gap > 0.0 && before.norm() > 0.0) turn = std::atan2(std::abs(cross2(before, seg)), before.dot(seg));
        const bool too_coarse = gap > options.max_seg || turn > options.max_turn;
        if (too_coarse && gap > options.tol_ref && dt > 1e-15) {
            dt /= 2.0;
            continue;
        }
        poly.vertices.push_back(q);
        poly.params.push_back(t1);
        poly.arclength.push_back(poly.length() + gap);
        t = t1;
        if (gap < 0.25 * options.max_seg && turn < 0.25 * options.max_turn) dt = std::min(1.0, dt * 1.5);
    }
    return poly;
}

double invariance_error(const ManifoldPolyline& poly)
{
    double worst = 0.0;
    const std::size_t n = poly.vertices.size();
    if (n < 3) return 0.0;
    const double t_max = poly.params.back();
    for (std::size_t i = 1; i < n; ++i) {
        const double target = poly.params[i] + 1.0;
        if (target > t_max) break;
        const Vec image = poly.step(poly.vertices[i]);
        const auto it = std::lower_bound(poly.params.begin() + 1, poly.params.end(), target);
        const std::size_t j = static_cast<std::size_t>(it - poly.params.begin());
        double best = std::numeric_limits<double>::infinity();
        const std::size_t lo = j >= 3 ? j - 2 : 1;
        const std::size_t hi = std::min(n - 1, j + 2);
        for (std::size_t k = lo; k <= hi; ++k) {
            best = std::min(best, point_segment_distance(image, poly.vertices[k - 1], poly.vertices[k]));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double distance_from_eigenline(const ManifoldPolyline& poly)
{
    double worst = 0.0;
    const Vec& p = poly.anchor().point;
    const Vec v = poly.direction().normalized();
    for (const Vec& x : poly.vertices) worst = std::max(worst, std::abs(cross2(x - p, v)));
    return worst;
}

// ---------------------------------------------------------------------------

namespace {

struct Segment {
    Vec a;
    Vec b;
    std::size_t index;  // segment between vertices index-1 and index
    Vec offset;         // wrapped minus cover coordinates
};

struct Crossing {
    double u = 0.0;  // along the first segment
    double v = 0.0;  // along the second
    bool parallel = false;
};

std::optional<Crossing> intersect(const Vec& a, const Vec& b, const Vec& c, const Vec& d)
{
    const Vec r = b - a;
    const Vec s = d - c;
    const Vec ca = c - a;
    const double denom = cross2(r, s);
    const double scale = r.norm() * s.norm();
    constexpr double slack = 1e-12;
    if (std::abs(denom) <= 1e-14 * scale || scale == 0.0) {
        // Parallel: report collinear overlap as a zero-angle contact.
        if (std::abs(cross2(ca, r)) > 1e-14 * std::max(1.0, ca.norm()) * r.norm()) return std::nullopt;
        const double len2 = r.squaredNorm();
        if (len2 == 0.0) return std::nullopt;
        const double t0 = ca.dot(r) / len2;
        const double t1 = (d - a).dot(r) / len2;
        const double lo = std::max(0.0, std::min(t0, t1));
        const double hi = std::min(1.0, std::max(t0, t1));
        if (lo > hi) return std::nullopt;
        const double v = t1 != t0 ? (lo - t0) / (t1 - t0) : 0.0;
        return Crossing{lo, v, true};
    }
    const double u = cross2(ca, s) / denom;
    const double v = cross2(ca, r) / denom;
    if (u < -slack || u > 1.0 + slack || v < -slack || v > 1.0 + slack) return std::nullopt;
    return Crossing{std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0), false};
}

std::vector<Segment> wrapped_segments(const ManifoldPolyline& poly)
{
    std::vector<Segment> out;
    const DynamicalMap& map = *poly.map();
    for (std::size_t i = 1; i < poly.vertices.size(); ++i) {
        const Vec& a = poly.vertices[i - 1];
        const Vec aw = map.wrap(a);
        out.push_back({aw, aw + (poly.vertices[i] - a), i, aw - a});
    }
    return out;
}

double acute_angle(const Vec& r, const Vec& s)
{
    return std::atan2(std::abs(cross2(r, s)), std::abs(r.dot(s)));
}

}  // namespace

HomoclinicResult homoclinic_points(const ManifoldPolyline& wu, const ManifoldPolyline& ws, double tol_int,
                                   double min_angle)
{
    if (!(tol_int > 0.0)) throw Error("homoclinic_points: tol_int must be > 0");
    const DynamicalMap& map = *wu.map();
    const Domain& dom = map.domain();
    if (map.distance(wu.anchor().point, ws.anchor().point) > 1e-9) throw Error("homoclinic_points: anchors differ");

    const std::vector<Segment> su = wrapped_segments(wu);
    const std::vector<Segment> ss = wrapped_segments(ws);
    double longest = 0.0;
    for (const auto& s : su) longest = std::max(longest, (s.b - s.a).norm());
    for (const auto& s : ss) longest = std::max(longest, (s.b - s.a).norm());
    const double h = std::max({longest, 1e-9, std::max(dom.extent(0), dom.extent(1)) / 4096.0});

    std::array<std::int64_t, 2> cells{};
    for (int i = 0; i < 2; ++i) {
        cells[i] = dom.periodic(i) ? std::max<std::int64_t>(1, static_cast<std::int64_t>(dom.extent(i) / h)) : 0;
    }
    const double cell_w[2] = {cells[0] ? dom.extent(0) / cells[0] : h, cells[1] ? dom.extent(1) / cells[1] : h};
    auto cell_of = [&](double x, int axis) {
        std::int64_t c = static_cast<std::int64_t>(std::floor((x - dom.lower()[axis]) / cell_w[axis]));
        if (cells[axis]) c = ((c % cells[axis]) + cells[axis]) % cells[axis];
        return c;
    };
    auto key = [](std::int64_t i, std::int64_t j) { return (static_cast<std::uint64_t>(i) << 32) ^ static_cast<std::uint32_t>(j); };
    auto for_cells = [&](const Segment& s, auto&& visit) {
        std::array<std::int64_t, 2> lo{}, hi{};
        for (int i = 0; i < 2; ++i) {
            const double a = std::min(s.a[i], s.b[i]);
            const double b = std::max(s.a[i], s.b[i]);
            lo[i] = static_cast<std::int64_t>(std::floor((a - dom.lower()[i]) / cell_w[i]));
            hi[i] = static_cast<std::int64_t>(std::floor((b - dom.lower()[i]) / cell_w[i]));
        }
        for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
            for (std::int64_t j = lo[1]; j <= hi[1]; ++j) {
                std::int64_t ci = i, cj = j;
                if (cells[0]) ci = ((ci % cells[0]) + cells[0]) % cells[0];
                if (cells[1]) cj = ((cj % cells[1]) + cells[1]) % cells[1];
                visit(key(ci, cj));
            }
        }
    };
    (void)cell_of;

    std::vector<std::pair<std::uint64_t, std::uint32_t>> table;
    for (std::uint32_t k = 0; k < ss.size(); ++k) for_cells(ss[k], [&](std::uint64_t c) { table.emplace_back(c, k); });
    std::sort(table.begin(), table.end());

    std::vector<Vec> shifts;
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            if ((i != 0 && !dom.periodic(0)) || (j != 0 && !dom.periodic(1))) continue;
            shifts.push_back(make_vec({i * dom.extent(0), j * dom.extent(1)}));
        }
    }

    const Vec anchor = wu.anchor().point;
    std::vector<HomoclinicHit> found;
    std::vector<std::uint32_t> candidates;
    for (const Segment& a : su) {
        candidates.clear();
        for_cells(a, [&](std::uint64_t c) {
            auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(c, std::uint32_t{0}));
            for (; it != table.end() && it->first == c; ++it) candidates.push_back(it->second);
        });
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (std::uint32_t k : candidates) {
            const Segment& b = ss[k];
            for (const Vec& shift : shifts) {
                const auto x = intersect(a.a, a.b, b.a + shift, b.b + shift);
                if (!x) continue;
                // Offsets from each curve's cover coordinates into this copy.
                const Vec off_u = a.offset;
                const Vec off_s = b.offset + shift;
                double tu0 = wu.params[a.index - 1], tu1 = wu.params[a.index];
                double ts0 = ws.params[b.index - 1], ts1 = ws.params[b.index];
                Vec pu0 = a.a, pu1 = a.b, ps0 = b.a + shift, ps1 = b.b + shift;
                Crossing cross = *x;
                const bool refinable = !x->parallel && a.index > 1 && b.index > 1;
                bool converged = !refinable;
                if (refinable) {
                    for (int it = 0; it < 200; ++it) {
                        if ((pu1 - pu0).norm() < tol_int && (ps1 - ps0).norm() < tol_int) {
                            converged = true;
                            break;
                        }
                        const double tum = 0.5 * (tu0 + tu1);
                        const double tsm = 0.5 * (ts0 + ts1);
                        const Vec pum = wu.point_at(tum) + off_u;
                        const Vec psm = ws.point_at(tsm) + off_s;
                        bool moved = false;
                        for (int hu = 0; hu < 2 && !moved; ++hu) {
                            for (int hs = 0; hs < 2 && !moved; ++hs) {
                                const Vec& ua = hu == 0 ? pu0 : pum;
                                const Vec& ub = hu == 0 ? pum : pu1;
                                const Vec& sa = hs == 0 ? ps0 : psm;
                                const Vec& sb = hs == 0 ? psm : ps1;
                                const auto y = intersect(ua, ub, sa, sb);
                                if (!y || y->parallel) continue;
                                if (hu == 0) {
                                    tu1 = tum;
                                    pu1 = pum;
                                } else {
                                    tu0 = tum;
                                    pu0 = pum;
                                }
                                if (hs == 0) {
                                    ts1 = tsm;
                                    ps1 = psm;
                                } else {
                                    ts0 = tsm;
                                    ps0 = psm;
                                }
                                cross = *y;
                                moved = true;
                            }
                        }
                        if (!moved) break;
                    }
                }
                // Chords crossed but the curves do not: a polyline artifact.
                if (!converged) continue;
                HomoclinicHit hit;
                const Vec ru = pu1 - pu0;
                const Vec rs = ps1 - ps0;
                hit.point = map.wrap(pu0 + cross.u * ru);
                hit.angle = cross.parallel ? 0.0 : acute_angle(ru, rs);
                const double su0 = wu.arclength[a.index - 1], su1 = wu.arclength[a.index];
                const double ss0 = ws.arclength[b.index - 1], ss1 = ws.arclength[b.index];
                if (refinable) {
                    hit.t_unstable = tu0 + cross.u * (tu1 - tu0);
                    hit.t_stable = ts0 + cross.v * (ts1 - ts0);
                } else {
                    hit.t_unstable = a.index > 1 ? wu.params[a.index - 1] + x->u * (wu.params[a.index] - wu.params[a.index - 1]) : 0.0;
                    hit.t_stable = b.index > 1 ? ws.params[b.index - 1] + x->v * (ws.params[b.index] - ws.params[b.index - 1]) : 0.0;
                }
                hit.s_unstable = su0 + x->u * (su1 - su0);
                hit.s_stable = ss0 + x->v * (ss1 - ss0);
                hit.distance_to_anchor = map.distance(hit.point, anchor);
                if (hit.distance_to_anchor < 10.0 * tol_int) continue;
                found.push_back(hit);
            }
        }
    }

    std::stable_sort(found.begin(), found.end(), [](const HomoclinicHit& x, const HomoclinicHit& y) {
        if (x.distance_to_anchor != y.distance_to_anchor) return x.distance_to_anchor < y.distance_to_anchor;
        return x.t_unstable < y.t_unstable;
    });
    HomoclinicResult result;
    for (const HomoclinicHit& hit : found) {
        auto& bucket = hit.angle >= min_angle ? result.hits : result.near_tangencies;
        bool duplicate = false;
        for (auto it = bucket.rbegin(); it != bucket.rend(); ++it) {
            if (hit.distance_to_anchor - it->distance_to_anchor > 10.0 * tol_int) break;
            if (map.distance(hit.point, it->point) <= 10.0 * tol_int) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) bucket.push_back(hit);
    }
    return result;
}

bool homoclinic_membership(const DynamicalMap& map, const HyperbolicPoint& anchor, const Vec& h, int steps, double tol)
{
    Vec x = map.wrap(h);
    Vec p = anchor.point;
    for (int i = 0; i < steps; ++i) {
        x = map.evaluate(x);
        p = map.evaluate(p);
    }
    if (!(map.distance(x, p) < tol)) return false;
    x = map.wrap(h);
    p = anchor.point;
    for (int i = 0; i < steps; ++i) {
        x = map.wrap(cover_step(map, x, Direction::inverse));
        p = map.wrap(cover_step(map, p, Direction::inverse));
    }
    return map.distance(x, p) < tol;
}

std::vector<Vec> omega_limit_cloud(const DynamicalMap& map, const Vec& q, int n, int burn_in)
{
    if (!(n > burn_in && burn_in >= 0)) throw Error("omega_limit_cloud: need n > burn_in >= 0");
    std::vector<Vec> cloud;
    cloud.reserve(static_cast<std::size_t>(n - burn_in));
    Vec x = map.wrap(q);
    for (int i = 1; i <= n; ++i) {
        x = map.evaluate(x);
        if (i > burn_in) cloud.push_back(x);
    }
    return cloud;
}

RecurrenceResult is_recurrent(const DynamicalMap& map, const Vec& q, double tol_rec, int n)
{
    if (!(tol_rec > 0.0) || n < 1) throw Error("is_recurrent: need tol_rec > 0 and n >= 1");
    RecurrenceResult r;
    r.min_distance = std::numeric_limits<double>::infinity();
    const Vec home = map.wrap(q);
    Vec x = home;
    for (int i = 1; i <= n; ++i) {
        x = map.evaluate(x);
        const double d = map.distance(x, home);
        r.min_distance = std::min(r.min_distance, d);
        if (d < tol_rec && !r.recurrent) {
            r.recurrent = true;
            r.first_return = i;
        }
    }
    return r;
}

bool AccumulationReport::all_found() const
{
    return std::all_of(rows.begin(), rows.end(), [](const AccumulationRow& r) { return r.found; });
}

AccumulationReport accumulation_check(MapPtr map, const HyperbolicPoint& hp, const Vec& q_on_wu,
                                      const std::vector<double>& radii, const std::vector<double>& schedule,
                                      const AccumulationOptions& options)
{
    const DynamicalMap& f = *map;
    AccumulationReport report;
    report.q = f.wrap(q_on_wu);
    if (f.distance(report.q, hp.point) <= 1e-12) throw Error("accumulation_check: q must differ from the anchor");
    if (!hp.real_spectrum || hp.eigenvectors.cols() < 2) throw Error("accumulation_check: anchor needs a real splitting");
    const Vec offset = f.displacement(hp.point, report.q);
    const int branch = offset.dot(hp.eigenvectors.col(0)) >= 0.0 ? 1 : -1;

    for (double r : radii) report.rows.push_back({r, false, 0.0, std::nullopt, std::numeric_limits<double>::infinity()});

    GrowOptions grow;
    grow.max_seg = options.max_seg;
    bool checked_q = false;
    for (double length : schedule) {
        grow.branch = branch;
        const ManifoldPolyline wu = grow_manifold(map, hp, ManifoldSide::unstable, length, grow);
        if (!checked_q) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < wu.vertices.size(); ++i) {
                const Vec a = wu.vertices[i - 1];
                const Vec qa = a + f.displacement(f.wrap(a), report.q);
                best = std::min(best, point_segment_distance(qa, a, wu.vertices[i]));
            }
            if (best > options.q_tolerance) throw Error("accumulation_check: q is not on the unstable manifold");
            checked_q = true;
        }
        std::vector<HomoclinicHit> hits;
        for (int b : {1, -1}) {
            grow.branch = b;
            const ManifoldPolyline ws = grow_manifold(map, hp, ManifoldSide::stable, length, grow);
            const HomoclinicResult res = homoclinic_points(wu, ws, options.tol_int);
            hits.insert(hits.end(), res.hits.begin(), res.hits.end());
        }
        report.hits_per_arclength.push_back(hits.size());
        for (AccumulationRow& row : report.rows) {
            if (row.found) continue;
            for (const HomoclinicHit& hit : hits) {
                const double d = f.distance(hit.point, report.q);
                if (d >= row.radius && d >= row.distance) {
                    row.distance = std::min(row.distance, d);
                    continue;
                }
                if (!homoclinic_membership(f, hp, hit.point, options.membership_steps, options.membership_tol)) continue;
                if (d < row.radius && (!row.found || d < row.distance)) {
                    row.found = true;
                    row.hit = hit;
                    row.arclength = length;
                }
                row.distance = std::min(row.distance, d);
            }
        }
    }
    return report;
}

}  // namespace dynkit
