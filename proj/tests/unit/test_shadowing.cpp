#include "dynkit/rng.hpp"
#include "dynkit/shadowing.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dynkit;

TEST_CASE("pseudo-orbit construction checks defects")
{
    const MapPtr cat = make_cat();
    const auto po = random_pseudo_orbit(*cat, make_vec({0.1, 0.2}), 1e-3, 50, 3);
    CHECK(po.length() == 50);
    for (double d : step_defects(*cat, po.points)) CHECK(d < 1e-3);
    CHECK_NOTHROW(make_pseudo_orbit(*cat, po.points, 1e-3));
    CHECK_THROWS_AS(make_pseudo_orbit(*cat, po.points, 1e-6), Error);
    const auto exact = orbit(*cat, make_vec({0.1, 0.2}), 10);
    CHECK_NOTHROW(make_pseudo_orbit(*cat, exact.points, 0.0));

    const auto drift = drift_pseudo_orbit(*cat, make_vec({0.1, 0.2}), 1e-3, 20, 3);
    const auto defects = step_defects(*cat, drift.points);
    for (double d : defects) CHECK(d == doctest::Approx(0.99e-3).epsilon(1e-6));
}

TEST_CASE("true orbits shadow themselves")
{
    const MapPtr m = make_standard(0.97);
    const auto o = orbit(*m, make_vec({0.3, 0.4}), 30);
    const auto po = make_pseudo_orbit(*m, o.points, 0.0);
    const auto r = shadow_search(*m, po, 1e-6, 1e-7);
    CHECK(r.shadowed);
    CHECK(r.achieved_eps < 1e-9);
    CHECK(r.seed_digits.size() == 2);
}

TEST_CASE("cat pseudo-orbits are shadowed")
{
    const MapPtr cat = make_cat();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto po = random_pseudo_orbit(*cat, make_vec({0.4, 0.7}), 1e-4, 100, seed);
        const auto r = shadow_search(*cat, po, 1e-2, 1e-3);
        CHECK(r.shadowed);
        CHECK(r.achieved_eps <= 1e-2);
        const auto trace = high_precision_trace(*cat, {HighReal(r.seed_digits[0]), HighReal(r.seed_digits[1])}, po.points);
        double worst = 0.0;
        for (double d : trace) worst = std::max(worst, d);
        CHECK(worst == doctest::Approx(r.achieved_eps).epsilon(1e-6));
    }
}

TEST_CASE("linear stable check closed form")
{
    const MapPtr m = make_linear(2.0, 0.5);
    const auto r = linear_stable_check(*m, make_vec({0.0, 1.0}), 1e-3, 10,
                                       {make_vec({1e-3, 1.0}), make_vec({0.0, 1.0005})});
    CHECK(r.pass);
    CHECK(r.seeds[0].max_distance == doctest::Approx(1.024));
    CHECK(r.seeds[1].max_distance == doctest::Approx(5e-4));
}

TEST_CASE("splice for the linear saddle")
{
    const MapPtr m = make_linear(2.0, 0.5);
    SpliceOptions opt;
    opt.n_back = 5;
    opt.n_forward = 5;
    const auto po = splice_pseudo_orbit(*m, make_vec({1e-3, 0.0}), make_vec({0.0, 1e-3}), 1e-2, opt);
    // q itself is within delta of x0, so the tail joins x0 directly.
    CHECK(po.n0 == 0);
    CHECK(po.junction == 4);
    CHECK(po.points.size() == 5 + 1 + 5);
    const auto defects = step_defects(*m, po.points);
    for (std::size_t i = 0; i < defects.size(); ++i) {
        if (static_cast<int>(i) != po.junction) CHECK(defects[i] < 1e-15);
    }
    CHECK(defects[po.junction] < 1e-2);
    CHECK_THROWS_AS(splice_pseudo_orbit(*m, make_vec({0.5, 0.0}), make_vec({0.0, 0.5}), 1e-3, opt), NoApproach);
}

TEST_CASE("profile is deterministic across threads")
{
    const MapPtr cat = make_cat();
    ProfileOptions a;
    a.steps = 30;
    a.threads = 1;
    ProfileOptions b = a;
    b.threads = 3;
    const auto ra = shadowing_profile(*cat, {1e-4, 1e-3}, 1e-2, 6, 9, a);
    const auto rb = shadowing_profile(*cat, {1e-4, 1e-3}, 1e-2, 6, 9, b);
    REQUIRE(ra.size() == 2);
    CHECK(ra[0].successes == rb[0].successes);
    CHECK(ra[1].worst_achieved_eps == rb[1].worst_achieved_eps);
    CHECK(ra[0].success_fraction == 1.0);
}

TEST_CASE("pseudo-orbit csv round trip")
{
    const MapPtr cat = make_cat();
    const auto po = random_pseudo_orbit(*cat, make_vec({0.1, 0.2}), 1e-3, 5, 1);
    std::stringstream s;
    write_pseudo_orbit_csv(*cat, po.points, s);
    const auto back = read_pseudo_orbit_csv(s, 2);
    REQUIRE(back.size() == po.points.size());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK((back[i] - po.points[i]).norm() < 1e-15);
}
