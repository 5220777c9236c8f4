#include "dynkit/phase_space.hpp"
#include "dynkit/rng.hpp"

#include <doctest.h>

#include <set>

using namespace dynkit;

TEST_CASE("domain wrap and minimum image")
{
    const Domain torus = Domain::unit_torus(2);
    const Vec w = torus.wrap(make_vec({1.25, -0.25}));
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.75));
    CHECK(torus.distance(make_vec({0.05, 0.5}), make_vec({0.95, 0.5})) == doctest::Approx(0.1));
    CHECK(torus.contains(make_vec({1.5, 2.5})));

    const Domain plane(make_vec({-1.0, -1.0}), make_vec({1.0, 1.0}));
    CHECK_FALSE(plane.contains(make_vec({1.0, 0.0})));
    CHECK(plane.contains(make_vec({-1.0, 0.0})));
    CHECK(plane.distance(make_vec({-0.9, 0.0}), make_vec({0.9, 0.0})) == doctest::Approx(1.8));
}

TEST_CASE("grid indexing round trip")
{
    const Grid grid(Domain(make_vec({0.0, 0.0, 0.0}), make_vec({1.0, 2.0, 4.0})), {2, 3, 1});
    CHECK(grid.box_count() == 4 * 8 * 2);
    for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
        const MultiIndex m = grid.multi_index(BoxId{b});
        CHECK(grid.linear_index(m).index == b);
        CHECK(b == m[0] + 4 * (m[1] + 8 * m[2]));
        const BoxGeometry g = grid.box_geometry(BoxId{b});
        CHECK(grid.box_of_point(g.center)->index == b);
    }
}

TEST_CASE("boxes are half-open")
{
    const Grid grid(Domain(make_vec({0.0}), make_vec({1.0})), {2});
    CHECK(grid.box_of_point(make_vec({0.25}))->index == 1);
    CHECK(grid.box_of_point(make_vec({0.0}))->index == 0);
    CHECK_FALSE(grid.box_of_point(make_vec({1.0})).has_value());
    CHECK_FALSE(grid.box_of_point(make_vec({-0.01})).has_value());
}

TEST_CASE("depth limit")
{
    CHECK_THROWS_AS(Grid(Domain::unit_torus(2), {13, 1}), Error);
    CHECK_THROWS_AS(Grid(Domain::unit_torus(2), {3}), Error);
}

TEST_CASE("rect enumeration wraps on periodic axes")
{
    const Grid grid(Domain::unit_torus(2), {2, 2});
    std::set<std::uint32_t> seen;
    const bool escapes =
        grid.for_each_box_in_rect(make_vec({-0.1, 0.1}), make_vec({0.1, 0.2}), [&](std::uint32_t b) { seen.insert(b); });
    CHECK_FALSE(escapes);
    CHECK(seen == std::set<std::uint32_t>{3, 0});

    const Grid plane(Domain(make_vec({0.0, 0.0}), make_vec({1.0, 1.0})), {2, 2});
    seen.clear();
    CHECK(plane.for_each_box_in_rect(make_vec({-0.1, 0.1}), make_vec({0.1, 0.2}), [&](std::uint32_t b) { seen.insert(b); }));
    CHECK(seen == std::set<std::uint32_t>{0});
    seen.clear();
    CHECK(plane.for_each_box_in_rect(make_vec({2.0, 0.1}), make_vec({3.0, 0.2}), [&](std::uint32_t b) { seen.insert(b); }));
    CHECK(seen.empty());
}

TEST_CASE("boxset algebra against std::set")
{
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(300));
        BoxSet a(n), b(n);
        std::set<std::uint32_t> sa, sb;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.3) {
                a.insert(i);
                sa.insert(i);
            }
            if (rng.uniform() < 0.5) {
                b.insert(i);
                sb.insert(i);
            }
        }
        std::set<std::uint32_t> u, x, d, c;
        for (std::uint32_t i = 0; i < n; ++i) {
            const bool ia = sa.count(i) > 0, ib = sb.count(i) > 0;
            if (ia || ib) u.insert(i);
            if (ia && ib) x.insert(i);
            if (ia && !ib) d.insert(i);
            if (!ia) c.insert(i);
        }
        auto as_set = [](const BoxSet& s) {
            const auto v = s.indices();
            return std::set<std::uint32_t>(v.begin(), v.end());
        };
        CHECK(as_set(a | b) == u);
        CHECK(as_set(a & b) == x);
        CHECK(as_set(a - b) == d);
        CHECK(as_set(a.complement()) == c);
        CHECK(a.complement().count() == n - a.count());
        CHECK(BoxSet::from_runs(n, a.runs()) == a);
        CHECK((a & b).subset_of(a));
        CHECK(a.intersects(b) == !x.empty());
        CHECK(set_algebra(a, b, SetOp::difference) == (a - b));
    }
}

TEST_CASE("boxset universe mismatch throws")
{
    BoxSet a(10), b(11);
    CHECK_THROWS_AS(a |= b, Error);
}

TEST_CASE("boundary and dilate")
{
    const Grid grid(Domain(make_vec({0.0, 0.0}), make_vec({1.0, 1.0})), {2, 2});
    BoxSet s(grid.box_count());
    s.insert(grid.linear_index({1, 1, 0}));
    s.insert(grid.linear_index({2, 1, 0}));
    CHECK(boundary_boxes(grid, s) == s);
    const BoxSet d = dilate(grid, s);
    CHECK(d.count() == 12);
    CHECK(s.subset_of(d));
    CHECK(grid.neighbors(BoxId{0}).size() == 3);
    const Grid torus(Domain::unit_torus(2), {2, 2});
    CHECK(torus.neighbors(BoxId{0}).size() == 8);
}
