#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixapprox/density_zoo.hpp"
#include "mixapprox/divergences.hpp"
#include "mixapprox/grid_engine.hpp"

using namespace mixapprox;

namespace {

TensorGrid unit_grid(int n = 2049, QuadratureRule rule = QuadratureRule::simpson)
{
    return TensorGrid(SupportBox::cube(1, 0.0, 1.0), n, rule);
}

GridFunction constant(const TensorGrid& g, double c)
{
    return GridFunction::sample(g, [c](const Point&) { return c; });
}

} // namespace

TEST_CASE("lq_norm examples")
{
    const TensorGrid g = unit_grid();
    const GridFunction u = constant(g, 1.0);
    CHECK(lq_norm(u, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lq_norm(u, kInfinity) == 1.0);
    const TargetDensity tent = make_target("tent", 1);
    CHECK(lq_norm(GridFunction::sample(g, tent.evaluator), 2.0) ==
          doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-9));
    CHECK_THROWS_AS(lq_norm(u, 0.5), ValidationError);
}

TEST_CASE("tv_distance examples")
{
    // Edges on interior nodes with midpoint values: trapezoid masses of the steps are exact.
    const TensorGrid g(SupportBox::cube(1, -1.0, 4.0), 5121, QuadratureRule::trapezoid);
    auto box = [&](double lo, double hi) {
        return GridFunction::sample(g, [=](const Point& x) {
            if (x[0] < lo - 1e-12 || x[0] > hi + 1e-12) {
                return 0.0;
            }
            return (std::abs(x[0] - lo) < 1e-12 || std::abs(x[0] - hi) < 1e-12) ? 0.5 : 1.0;
        });
    };
    const GridFunction a = box(0.0, 1.0);
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(a, box(2.0, 3.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tv_distance(a, box(0.5, 1.5)) == doctest::Approx(0.5).epsilon(1e-12));
    const GridFunction d(g, a.values - box(0.5, 1.5).values);
    CHECK(tv_distance(a, box(0.5, 1.5)) == 0.5 * lq_norm(d, 1.0));
    CHECK_THROWS_AS(tv_distance(a, constant(unit_grid(), 1.0)), ValidationError);
}

TEST_CASE("kl_divergence examples")
{
    const TensorGrid g = unit_grid();
    const GridFunction u = constant(g, 1.0);
    CHECK(kl_divergence(u, u) == 0.0);

    // g(x) = 2x vanishes at the left node: an absolute-continuity violation on the closed box.
    const GridFunction ramp = GridFunction::sample(g, [](const Point& x) { return 2 * x[0]; });
    CHECK_THROWS_AS(kl_divergence(u, ramp), SupportError);
    // On [a, 1] the closed form is (1 - log 2) - (a - a log(2a)) -> 1 - log 2.
    const double a = 1.0 / 1024;
    const TensorGrid off(SupportBox::cube(1, a, 1.0), 65537, QuadratureRule::simpson);
    const double kl = kl_divergence(constant(off, 1.0), GridFunction::sample(off, [](const Point& x) { return 2 * x[0]; }));
    CHECK(kl == doctest::Approx((1 - std::log(2.0)) - (a - a * std::log(2 * a))).epsilon(1e-9));
    CHECK(std::abs(kl - 0.30685) < 0.01);

    CHECK(kl_divergence(u, constant(g, 0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const Array log_half = Array::Constant(g.size(), std::log(0.5));
    CHECK(kl_divergence(u, log_half) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("empirical_distance examples")
{
    Rng rng(1);
    Samples xs(10, 1);
    for (int i = 0; i < 10; ++i) {
        xs(i, 0) = uniform01(rng);
    }
    const DensityFn one = [](const Point&) { return 1.0; };
    const DensityFn half = [](const Point&) { return 0.5; };
    CHECK(empirical_distance(one, one, xs) == 0.0);
    CHECK(empirical_distance(one, half, xs) == doctest::Approx(0.5).epsilon(1e-15));

    const TargetDensity u = make_target("uniform-box", 1);
    const TargetDensity tent = make_target("tent", 1);
    Samples grid(128, 1);
    double oracle = 0.0;
    for (int i = 0; i < 128; ++i) {
        grid(i, 0) = (i + 0.5) / 128;
        const double d = 1.0 - (2 - std::abs(4 * grid(i, 0) - 2));
        oracle += d * d;
    }
    oracle = std::sqrt(oracle / 128);
    CHECK(empirical_distance(u.evaluator, tent.evaluator, grid) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK_THROWS_AS(empirical_distance(one, half, Samples(0, 1)), ValidationError);
}

TEST_CASE("kl_l2_bound_check examples")
{
    const TargetDensity u = make_target("uniform-box", 1);
    const TensorGrid g = default_grid(u);
    const GridFunction fu = GridFunction::sample(g, u.evaluator);
    const KlL2Check same = kl_l2_bound_check(u, fu);
    CHECK(same.passed);
    CHECK(same.kl == 0.0);
    CHECK(same.rhs == 0.0);

    const GridFunction lin = GridFunction::sample(g, [](const Point& x) { return 0.8 + 0.4 * x[0]; });
    const KlL2Check c = kl_l2_bound_check(u, lin);
    // -int_0^1 log(0.8 + 0.4 x) dx by 30-digit quadrature; int (0.2 - 0.4 x)^2 = 1/75.
    CHECK(c.kl == doctest::Approx(0.00674822698971655432).epsilon(1e-10));
    CHECK(c.l2_squared == doctest::Approx(1.0 / 75).epsilon(1e-12));
    CHECK(c.beta == doctest::Approx(0.8));
    CHECK(c.rhs == doctest::Approx(1.0 / 60).epsilon(1e-12));
    CHECK(c.passed);

    const GridFunction touching = GridFunction::sample(g, [](const Point& x) { return 2 * x[0]; });
    CHECK_THROWS_AS(kl_l2_bound_check(u, touching), SupportError);
}

TEST_CASE("divergences are nonnegative and stable under refinement")
{
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = 0.9 * (2 * uniform01(rng) - 1);
        const double b = 0.9 * (2 * uniform01(rng) - 1);
        auto pair_at = [&](int n) {
            const TensorGrid g = unit_grid(n);
            const GridFunction f = GridFunction::sample(g, [a](const Point& x) { return 1 + a * std::cos(2 * M_PI * x[0]); });
            const GridFunction h = GridFunction::sample(g, [b](const Point& x) { return 1 + b * std::sin(2 * M_PI * x[0]); });
            return std::make_pair(f, h);
        };
        const auto [f, h] = pair_at(1025);
        const auto [f2, h2] = pair_at(2049);
        const double kl = kl_divergence(f, h);
        const double tv = tv_distance(f, h);
        CHECK(kl >= 0.0);
        CHECK(tv >= 0.0);
        CHECK(tv <= 1.0 + 1e-9);
        CHECK(std::abs(kl - kl_divergence(f2, h2)) < 1e-4);
        CHECK(std::abs(tv - tv_distance(f2, h2)) < 1e-4);
        CHECK(std::abs(lq_norm(GridFunction(f.grid, f.values - h.values), 2.0) -
                       lq_norm(GridFunction(f2.grid, f2.values - h2.values), 2.0)) < 1e-4);
    }
}
