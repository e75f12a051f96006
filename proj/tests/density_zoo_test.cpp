#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixapprox/density_zoo.hpp"
#include "mixapprox/grid_engine.hpp"

using namespace mixapprox;

namespace {

Point pt(std::initializer_list<double> v)
{
    Point x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double c : v) {
        x[i++] = c;
    }
    return x;
}

// phi(0) / (Phi(1) - Phi(-1)) and phi(1) / (Phi(1) - Phi(-1)), 30-digit arithmetic.
constexpr double kTruncNormalAtZero = 0.584368567256816644571;
constexpr double kTruncNormalAtOne = 0.354437452613603394404;

} // namespace

TEST_CASE("make_target examples")
{
    const TargetDensity u1 = make_target("uniform-box", 1);
    CHECK(u1(pt({0.5})) == 1.0);
    CHECK(u1.beta_lower == 1.0);
    const TargetDensity u2 = make_target("uniform-box", 2);
    CHECK(u2(pt({0.25, 0.75})) == 1.0);
    const TargetDensity tn = make_target("truncated-normal", 1);
    CHECK(tn(pt({0.0})) == doctest::Approx(kTruncNormalAtZero).epsilon(1e-14));
    CHECK(tn.beta_lower == doctest::Approx(kTruncNormalAtOne).epsilon(1e-14));
    CHECK(tn(pt({1.5})) == 0.0);
    CHECK_THROWS_AS(make_target("nope", 1), ValidationError);
    CHECK_THROWS_AS(make_target("tent", 4), ValidationError);
    CHECK_THROWS_AS(make_target("tent", 0), ValidationError);
}

TEST_CASE("every zoo target has unit mass, declared bounds and zero extension")
{
    for (const std::string& name : zoo_names()) {
        for (int dim = 1; dim <= 3; ++dim) {
            CAPTURE(name);
            CAPTURE(dim);
            const TargetDensity f = make_target(name, dim);
            const TensorGrid grid = default_grid(f);
            const GridFunction v = GridFunction::sample(grid, f.evaluator);
            CHECK(std::abs(quadrature_integrate(v) - 1.0) <= 1e-6);
            CHECK(v.values.minCoeff() >= f.beta_lower * (1 - 1e-12));
            CHECK(v.values.maxCoeff() <= f.beta_upper * (1 + 1e-12));
            Point outside = f.support.upper();
            outside[0] += 0.01;
            CHECK(f(outside) == 0.0);
            if (f.in_f5()) {
                CHECK(verify_f5_membership(f, grid).passed);
            }
        }
    }
}

TEST_CASE("verify_f5_membership examples")
{
    const TargetDensity u = make_target("uniform-box", 1);
    const MembershipReport ru = verify_f5_membership(u, TensorGrid(u.support, 1024, QuadratureRule::trapezoid));
    CHECK(ru.passed);
    CHECK(std::abs(ru.measured_mass - 1.0) < 1e-10);

    const TargetDensity tn = make_target("truncated-normal", 1);
    const MembershipReport rt = verify_f5_membership(tn, default_grid(tn));
    CHECK(rt.passed);
    CHECK(rt.measured_min == doctest::Approx(kTruncNormalAtOne).epsilon(1e-12));

    TargetDensity scaled = tn;
    scaled.evaluator = [tn](const Point& x) { return 0.9 * tn(x); };
    const MembershipReport rs = verify_f5_membership(scaled, default_grid(tn));
    CHECK_FALSE(rs.passed);
    CHECK(rs.measured_mass == doctest::Approx(0.9).epsilon(1e-9));

    const TensorGrid wrong(SupportBox::cube(1, 0.0, 1.0), 129, QuadratureRule::simpson);
    CHECK_THROWS_AS(verify_f5_membership(tn, wrong), ValidationError);
}

TEST_CASE("estimate_lipschitz examples and certificate property")
{
    const TargetDensity u = make_target("uniform-box", 1);
    CHECK(estimate_lipschitz(u, default_grid(u), 1.0) == 0.0);
    const TargetDensity tent = make_target("tent", 1);
    CHECK(estimate_lipschitz(tent, default_grid(tent), 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    // Dense finite-difference oracle: sup |f'| of the truncated normal is phi(1)/Z at the edges.
    const TargetDensity tn = make_target("truncated-normal", 1);
    const double est = estimate_lipschitz(tn, default_grid(tn), 1.0);
    CHECK(est == doctest::Approx(kTruncNormalAtOne).epsilon(1e-3));
    CHECK(est <= tn.lipschitz_constant * (1 + 1e-6));

    for (const std::string& name : zoo_names()) {
        for (int dim = 1; dim <= 2; ++dim) {
            const TargetDensity f = make_target(name, dim);
            CAPTURE(name);
            CHECK(estimate_lipschitz(f, default_grid(f), f.lipschitz_exponent) <=
                  f.lipschitz_constant * (1 + 1e-6));
        }
    }
    CHECK_THROWS_AS(estimate_lipschitz(tn, TensorGrid(tn.support, 33, QuadratureRule::simpson), 1.0),
                    ValidationError);
}

TEST_CASE("sampler histograms match binned masses within four standard errors")
{
    constexpr int kBins = 16;
    constexpr int kCount = 100000;
    for (const std::string& name : zoo_names()) {
        CAPTURE(name);
        const TargetDensity f = make_target(name, 1);
        Rng rng(derive_seed(2024, std::hash<std::string>{}(name)));
        const Samples xs = f.sample(rng, kCount);
        const double lo = f.support.lower(0);
        const double width = f.support.width(0) / kBins;
        std::vector<int> hist(kBins, 0);
        for (Eigen::Index j = 0; j < xs.rows(); ++j) {
            REQUIRE(f.support.contains(Point(xs.row(j).transpose())));
            const int b = std::min(kBins - 1, static_cast<int>((xs(j, 0) - lo) / width));
            ++hist[b];
        }
        for (int b = 0; b < kBins; ++b) {
            const TensorGrid bin(SupportBox::cube(1, lo + b * width, lo + (b + 1) * width), 513,
                                 QuadratureRule::simpson);
            const double mass = quadrature_integrate(GridFunction::sample(bin, f.evaluator));
            const double se = std::sqrt(mass * (1 - mass) / kCount);
            CHECK(std::abs(hist[b] / double(kCount) - mass) <= 4 * se + 1e-12);
        }
    }
}

TEST_CASE("product targets sample each coordinate from the marginal")
{
    const TargetDensity f = make_target("truncated-normal-mixture", 3);
    Rng rng(7);
    const Samples xs = f.sample(rng, 20000);
    CHECK(xs.cols() == 3);
    const Eigen::RowVectorXd mean = xs.colwise().mean();
    for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(mean[a] - 0.5) < 0.01);
    }
    Rng again(7);
    CHECK(f.sample(again, 20000) == xs);
}
