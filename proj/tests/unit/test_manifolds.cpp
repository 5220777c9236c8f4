#include "dynkit/manifolds.hpp"

#include <doctest.h>

#include <cmath>

using namespace dynkit;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

}

TEST_CASE("cat fixed point spectrum")
{
    const MapPtr cat = make_cat();
    const HyperbolicPoint hp = classify_periodic_point(*cat, make_vec({0.0, 0.0}), 1);
    CHECK(hp.is_hyperbolic);
    CHECK(hp.real_spectrum);
    CHECK(hp.eigenvalues[0].real() == doctest::Approx(kPhi * kPhi));
    CHECK(hp.eigenvalues[1].real() == doctest::Approx(1.0 / (kPhi * kPhi)));
    // Unstable eigenvector is proportional to (phi, 1).
    CHECK(hp.eigenvectors(1, 0) / hp.eigenvectors(0, 0) == doctest::Approx(1.0 / kPhi));
    CHECK(hp.eigen_residual < 1e-12);
}

TEST_CASE("period jacobian is the chain rule")
{
    const MapPtr m = make_standard(0.97);
    const Vec p = make_vec({0.2, 0.3});
    const Mat j2 = period_jacobian(*m, p, 2);
    const Mat expect = m->jacobian(m->evaluate(p)) * m->jacobian(p);
    CHECK((j2 - expect).norm() < 1e-12);
}

TEST_CASE("shear fixed point is not hyperbolic")
{
    const MapPtr m = make_shear();
    const HyperbolicPoint hp = classify_periodic_point(*m, make_vec({0.0, 0.0}), 1);
    CHECK_FALSE(hp.is_hyperbolic);
}

TEST_CASE("periodic points of the cat map")
{
    const MapPtr cat = make_cat();
    const Grid grid(cat->domain(), {3, 3});
    const auto pts = find_periodic_points(*cat, 1, grid, 1e-10);
    // det(A - I) = -1: the origin is the only fixed point.
    REQUIRE(pts.size() == 1);
    CHECK(cat->distance(pts[0].point, make_vec({0.0, 0.0})) < 1e-9);
    // Period 2 points: |det(A^2 - I)| = 5.
    const auto p2 = find_periodic_points(*cat, 2, Grid(cat->domain(), {4, 4}), 1e-10);
    CHECK(p2.size() == 5);
    for (const auto& h : p2) CHECK(h.fixed_residual < 1e-9);
}

TEST_CASE("cat manifolds are straight and invariant")
{
    const MapPtr cat = make_cat();
    const HyperbolicPoint hp = classify_periodic_point(*cat, make_vec({0.0, 0.0}), 1);
    for (ManifoldSide side : {ManifoldSide::unstable, ManifoldSide::stable}) {
        const ManifoldPolyline poly = grow_manifold(cat, hp, side, 3.0);
        CHECK(poly.length() >= 3.0);
        CHECK(distance_from_eigenline(poly) < 1e-9);
        CHECK(invariance_error(poly) < 1e-8);
        CHECK((poly.at_arclength(1.0) - poly.vertices[0]).norm() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("standard map manifolds are invariant")
{
    const MapPtr m = make_standard(0.97);
    const HyperbolicPoint hp = classify_periodic_point(*m, make_vec({0.0, 0.0}), 1);
    REQUIRE(hp.is_hyperbolic);
    // Chord error shrinks as the segments get shorter.
    const double coarse = invariance_error(grow_manifold(m, hp, ManifoldSide::unstable, 2.0));
    GrowOptions fine;
    fine.max_seg = 0.001;
    const double refined = invariance_error(grow_manifold(m, hp, ManifoldSide::unstable, 2.0, fine));
    CHECK(coarse < 1e-3);
    CHECK(refined < coarse / 4.0);
}

TEST_CASE("homoclinic points of the cat map")
{
    const MapPtr cat = make_cat();
    const HyperbolicPoint hp = classify_periodic_point(*cat, make_vec({0.0, 0.0}), 1);
    const ManifoldPolyline wu = grow_manifold(cat, hp, ManifoldSide::unstable, 3.0);
    const ManifoldPolyline ws = grow_manifold(cat, hp, ManifoldSide::stable, 3.0);
    const HomoclinicResult r = homoclinic_points(wu, ws, 1e-10);
    CHECK(r.hits.size() > 0);
    for (const auto& h : r.hits) {
        CHECK(homoclinic_membership(*cat, hp, h.point));
        CHECK(h.angle > 1.0);  // the eigenlines are orthogonal
    }
    CHECK_FALSE(homoclinic_membership(*cat, hp, make_vec({0.3, 0.3})));
}

TEST_CASE("linear saddle has no homoclinic points")
{
    const MapPtr m = make_linear(2.0, 0.5);
    const HyperbolicPoint hp = classify_periodic_point(*m, make_vec({0.0, 0.0}), 1);
    const ManifoldPolyline wu = grow_manifold(m, hp, ManifoldSide::unstable, 0.9);
    const ManifoldPolyline ws = grow_manifold(m, hp, ManifoldSide::stable, 0.9);
    CHECK(homoclinic_points(wu, ws, 1e-10).hits.empty());
}

TEST_CASE("recurrence and omega limit")
{
    const MapPtr rot = make_rotation(0.25);
    const auto r = is_recurrent(*rot, make_vec({0.1}), 1e-9, 10);
    CHECK(r.recurrent);
    CHECK(r.first_return == 4);
    CHECK(omega_limit_cloud(*rot, make_vec({0.1}), 10, 2).size() == 8);
    CHECK_FALSE(is_recurrent(*make_translation(), make_vec({0.5, 0.5}), 1e-3, 5).recurrent);
}
