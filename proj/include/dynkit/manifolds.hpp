#pragma once

#include "dynkit/phase_space.hpp"
#include "dynkit/system.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace dynkit {

struct HyperbolicPoint {
    Vec point;
    int period = 1;
    /// Sorted by decreasing modulus.
    std::vector<std::complex<double>> eigenvalues;
    /// Column k belongs to eigenvalues[k]; real parts, unit length, largest
    /// entry positive. Meaningful when the spectrum is real.
    Mat eigenvectors;
    bool real_spectrum = false;
    bool is_hyperbolic = false;
    double fixed_residual = 0.0;   // |f^period(p) - p|
    double eigen_residual = 0.0;   // max_k |Df v_k - lambda_k v_k|
};

/// D(f^period) at p, by the chain rule along the orbit.
Mat period_jacobian(const DynamicalMap& map, const Vec& p, int period);

HyperbolicPoint classify_periodic_point(const DynamicalMap& map, const Vec& p, int period, double tol_hyp = 1e-6);

/// Newton on f^period(x) - x from every box center (pseudo-inverse steps, so
/// degenerate Jacobians still converge); roots merged within 10 tol_fix.
std::vector<HyperbolicPoint> find_periodic_points(const DynamicalMap& map, int period, const Grid& grid,
                                                  double tol_fix, double tol_hyp = 1e-6, int threads = 1);

enum class ManifoldSide { stable, unstable };

/// One branch of W^s or W^u of a hyperbolic periodic point (2D maps).
///
/// Vertices live on the universal cover and start at the anchor. The curve
/// is parametrized by t >= 0: point(t) = G^floor(t)(p + r0 mu^frac(t) v),
/// where G = f^period (unstable) or f^-period (stable), squared when the
/// eigenvalue is negative, and mu > 1 is the expansion of G along v.
class ManifoldPolyline {
public:
    ManifoldPolyline(MapPtr map, HyperbolicPoint anchor, ManifoldSide side, int branch, double r0);

    const MapPtr& map() const noexcept { return map_; }
    const HyperbolicPoint& anchor() const noexcept { return anchor_; }
    ManifoldSide side() const noexcept { return side_; }
    int branch() const noexcept { return branch_; }
    const Vec& direction() const noexcept { return direction_; }
    double expansion() const noexcept { return mu_; }
    int steps_per_iterate() const noexcept { return steps_; }

    Vec point_at(double t) const;
    /// One application of G on the cover.
    Vec step(const Vec& x) const;

    std::vector<Vec> vertices;      // vertices[0] = anchor point
    std::vector<double> params;     // t of each vertex; params[0] = -infinity (the anchor)
    std::vector<double> arclength;  // cumulative

    double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
    /// Point at a given arclength along the polyline (linear between vertices).
    Vec at_arclength(double s) const;

private:
    MapPtr map_;
    HyperbolicPoint anchor_;
    ManifoldSide side_;
    int branch_;
    double r0_;
    Vec direction_;
    double mu_ = 1.0;
    int steps_ = 1;  // f (or f^-1) applications per G
};

struct GrowOptions {
    double max_seg = 0.01;
    double tol_ref = 1e-12;  // segments are not split below this length
    double max_turn = 0.2;   // radians
    int branch = 1;          // +1 or -1 along the eigenvector
    double r0 = 0.0;         // 0: 1e-6 times the window scale
};

ManifoldPolyline grow_manifold(MapPtr map, const HyperbolicPoint& hp, ManifoldSide side, double target_arclength,
                               const GrowOptions& options = {});

/// Largest distance from the image under G of a vertex to the polyline, over
/// vertices whose image parameter stays within the polyline.
double invariance_error(const ManifoldPolyline& poly);

/// Largest distance of a vertex from the straight line p + s v on the cover.
double distance_from_eigenline(const ManifoldPolyline& poly);

struct HomoclinicHit {
    Vec point;             // wrapped into the window
    double t_unstable = 0.0;
    double t_stable = 0.0;
    double s_unstable = 0.0;  // arclength along each polyline
    double s_stable = 0.0;
    double angle = 0.0;       // acute angle between the curves, radians
    double distance_to_anchor = 0.0;
};

struct HomoclinicResult {
    std::vector<HomoclinicHit> hits;            // angle >= min_angle
    std::vector<HomoclinicHit> near_tangencies;
};

/// Segment crossings of wu and ws (with lattice translates on periodic
/// axes), refined by bisection on both curves until both brackets are below
/// tol_int; crossings that do not refine are dropped, hits near the anchor too.
HomoclinicResult homoclinic_points(const ManifoldPolyline& wu, const ManifoldPolyline& ws, double tol_int,
                                   double min_angle = 1e-3);

/// Both f^steps(h) and f^-steps(h) within tol of the anchor orbit.
bool homoclinic_membership(const DynamicalMap& map, const HyperbolicPoint& anchor, const Vec& h, int steps = 20,
                           double tol = 1e-3);

std::vector<Vec> omega_limit_cloud(const DynamicalMap& map, const Vec& q, int n, int burn_in);

struct RecurrenceResult {
    bool recurrent = false;
    int first_return = 0;  // 0 when not recurrent
    double min_distance = 0.0;
};

RecurrenceResult is_recurrent(const DynamicalMap& map, const Vec& q, double tol_rec, int n);

struct AccumulationOptions {
    double max_seg = 0.01;
    double tol_int = 1e-10;
    double q_tolerance = 1e-6;
    int membership_steps = 20;
    double membership_tol = 1e-3;
};

struct AccumulationRow {
    double radius = 0.0;
    bool found = false;
    double arclength = 0.0;  // first schedule entry that succeeded
    std::optional<HomoclinicHit> hit;
    double distance = 0.0;   // |hit - q|, or the closest miss at exhaustion
};

struct AccumulationReport {
    Vec q;
    std::vector<AccumulationRow> rows;
    std::vector<std::size_t> hits_per_arclength;
    bool all_found() const;
};

/// For each radius, grows W^u (branch of q) and both branches of W^s to each
/// arclength of the schedule and looks for a transverse homoclinic point
/// within the radius of q that passes the membership test.
AccumulationReport accumulation_check(MapPtr map, const HyperbolicPoint& hp, const Vec& q_on_wu,
                                      const std::vector<double>& radii, const std::vector<double>& schedule,
                                      const AccumulationOptions& options = {});

}  // namespace dynkit
