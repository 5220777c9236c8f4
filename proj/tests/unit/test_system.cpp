#include "dynkit/rng.hpp"
#include "dynkit/system.hpp"

#include <doctest.h>

#include <cmath>

using namespace dynkit;

namespace {

constexpr double kTwoPi = 6.283185307179586;

}

TEST_CASE("cat map values and inverse")
{
    const MapPtr cat = make_cat();
    const Vec y = cat->evaluate(make_vec({0.3, 0.6}));
    CHECK(y[0] == doctest::Approx(0.2));
    CHECK(y[1] == doctest::Approx(0.9));
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vec p = rng.uniform_in(cat->domain().lower(), cat->domain().upper());
        const Vec back = cat->evaluate(cat->evaluate(p), Direction::inverse);
        CHECK(cat->distance(back, p) < 1e-12);
    }
}

TEST_CASE("standard map against its formula")
{
    const double k = 0.97;
    const MapPtr map = make_standard(k);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(), y = rng.uniform();
        const double s = k / kTwoPi * std::sin(kTwoPi * x);
        const Vec expect = make_vec({std::fmod(x + y + s + 2.0, 1.0), std::fmod(y + s + 2.0, 1.0)});
        CHECK(map->distance(map->evaluate(make_vec({x, y})), expect) < 1e-13);
        const Vec back = map->evaluate(map->evaluate(make_vec({x, y})), Direction::inverse);
        CHECK(map->distance(back, make_vec({x, y})) < 1e-12);
    }
}

TEST_CASE("translation, linear, contraction, shear, rotation")
{
    CHECK(make_translation()->lift(make_vec({1.0, 2.0}))[0] == 2.0);
    const Vec l = make_linear(2.0, 0.5)->lift(make_vec({3.0, 4.0}));
    CHECK(l[0] == 6.0);
    CHECK(l[1] == 2.0);
    CHECK(make_contraction(0.5, 3)->lift(make_vec({1.0, 2.0, 4.0}))[2] == 2.0);
    CHECK(make_shear()->lift(make_vec({1.0, 2.0}))[0] == 3.0);
    CHECK(make_rotation(0.75)->evaluate(make_vec({0.5}))[0] == doctest::Approx(0.25));
    CHECK_THROWS_AS(make_contraction(1.5, 1), Error);
    CHECK(make_contraction(0.5, 1)->evaluate(make_vec({0.25}), Direction::inverse)[0] == 0.5);
}

TEST_CASE("jacobians agree with finite differences")
{
    for (const MapPtr& m : {make_cat(), make_standard(0.97), make_shear(), make_linear(2.0, 0.5)}) {
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            const Vec p = rng.uniform_in(m->domain().lower(), m->domain().upper());
            CHECK((m->jacobian(p) - finite_difference_jacobian(*m, p)).norm() < 1e-6);
        }
    }
}

TEST_CASE("local derivative bound dominates sampled jacobians")
{
    const MapPtr m = make_standard(0.97);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const Vec c = rng.uniform_in(m->domain().lower(), m->domain().upper());
        const Vec r = make_vec({0.05, 0.05});
        const Mat bound = m->local_derivative_bound(c, r);
        for (int k = 0; k < 20; ++k) {
            const Vec p = c + make_vec({rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)});
            const Mat j = m->jacobian(p).cwiseAbs();
            CHECK((bound - j).minCoeff() >= -1e-12);
        }
    }
}

TEST_CASE("polynomial maps")
{
    PolynomialSpec spec;
    PolynomialTerm a, b;
    a.coefficient = 1.5;
    a.powers = {1, 0, 0};
    b.coefficient = -0.5;
    b.powers = {3, 0, 0};
    spec.components = {{a, b}};
    spec.window = Domain(make_vec({-2.0}), make_vec({2.0}));
    const MapPtr cubic = make_polynomial(spec);
    CHECK(cubic->evaluate(make_vec({2.0}))[0] == doctest::Approx(-1.0));
    CHECK(cubic->jacobian(make_vec({1.0}))(0, 0) == doctest::Approx(0.0));
    CHECK(cubic->spec().lipschitz_bound >= 4.5);
    const Mat bound = cubic->local_derivative_bound(make_vec({0.0}), make_vec({0.1}));
    CHECK(bound(0, 0) >= 1.5);
    CHECK(bound(0, 0) < 1.6);

    PolynomialTerm high;
    high.coefficient = 1.0;
    high.powers = {5, 0, 0};
    spec.components = {{high}};
    CHECK_THROWS_AS(make_polynomial(spec), Error);
}

TEST_CASE("registry lookup")
{
    CHECK(make_registry_map("standard", {{"K", 0.5}})->spec().name == "standard");
    CHECK_THROWS_AS(make_registry_map("nope", {}), Error);
}

TEST_CASE("volume check")
{
    CHECK(volume_check(*make_cat(), 100, 1e-9, 1).pass);
    CHECK(volume_check(*make_standard(0.97), 100, 1e-9, 1).pass);
    CHECK_FALSE(volume_check(*make_linear(2.0, 0.25), 100, 1e-9, 1).pass);
}

TEST_CASE("lagrange probe")
{
    const auto r = lagrange_probe(*make_translation(), make_vec({0.5, 0.5}), 10.0, 20);
    REQUIRE(std::holds_alternative<Escaped>(r));
    CHECK(std::get<Escaped>(r).step == 10);
    CHECK(std::holds_alternative<Bounded>(lagrange_probe(*make_linear(0.5, 0.5), make_vec({1.0, 1.0}), 10.0, 20)));
}

TEST_CASE("high precision lift matches double")
{
    const MapPtr m = make_standard(0.97);
    const Vec p = make_vec({0.123, 0.456});
    HighReal in[2] = {HighReal(0.123), HighReal(0.456)};
    HighReal out[2];
    m->lift_high(in, out);
    const Vec d = m->lift(p);
    CHECK(std::abs(out[0].convert_to<double>() - d[0]) < 1e-14);
    CHECK(std::abs(out[1].convert_to<double>() - d[1]) < 1e-14);
}

TEST_CASE("inverse newton")
{
    const MapPtr m = make_standard(0.97);
    const Vec x = make_vec({0.3, 0.7});
    const auto r = inverse_newton(*m, m->evaluate(x), x + make_vec({0.01, -0.01}));
    REQUIRE(r.has_value());
    CHECK(m->distance(*r, x) < 1e-9);
}
