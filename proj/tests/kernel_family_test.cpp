#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "mixapprox/grid_engine.hpp"
#include "mixapprox/kernel_family.hpp"
#include "mixapprox/numeric.hpp"

using namespace mixapprox;
namespace nm = mixapprox::numeric;

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

} // namespace

TEST_CASE("make_product_kernel examples")
{
    CHECK(make_product_kernel("gaussian", 2)(pt({0, 0})) == doctest::Approx(1.0 / (2 * nm::kPi)).epsilon(1e-15));
    const ProductKernel u = make_product_kernel("uniform-symmetric", 1);
    CHECK(u(pt({0.0})) == 1.0);
    CHECK(u(pt({0.6})) == 0.0);
    CHECK(make_product_kernel("laplace", 1)(pt({0.0})) == 0.5);
    CHECK_THROWS_AS(make_product_kernel("cauchy", 1), ValidationError);
}

TEST_CASE("dilate examples")
{
    const Dilation g2 = dilate(make_product_kernel("gaussian", 1), 2);
    CHECK(g2(pt({0.0})) == doctest::Approx(2 * nm::kInvSqrt2Pi).epsilon(1e-15));
    const Dilation u4 = dilate(make_product_kernel("uniform-symmetric", 1), 4);
    CHECK(u4(pt({0.0})) == 4.0);
    CHECK(u4(pt({0.12})) == 4.0);
    CHECK(u4(pt({0.13})) == 0.0);
    CHECK(u4.radius(1e-9) == doctest::Approx(0.125));
    CHECK_THROWS_AS(dilate(make_product_kernel("gaussian", 1), 0), ValidationError);

    Rng rng(5);
    for (const std::string& name : kernel_names()) {
        const ProductKernel base = make_product_kernel(name, 2);
        const Dilation one = dilate(base, 1);
        for (int i = 0; i < 20; ++i) {
            const Point x = pt({4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2});
            CHECK(one(x) == base(x));
        }
    }
}

TEST_CASE("dilation formula at random probes")
{
    Rng rng(11);
    for (const std::string& name : kernel_names()) {
        for (int dim = 1; dim <= 3; ++dim) {
            const ProductKernel base = make_product_kernel(name, dim);
            for (int k : {1, 3, 16}) {
                const Dilation d = dilate(base, k);
                for (int probe = 0; probe < 100; ++probe) {
                    Point x(dim);
                    for (int a = 0; a < dim; ++a) {
                        x[a] = (2 * uniform01(rng) - 1) / k;
                    }
                    const Point kx = k * x;
                    CHECK(d(x) == doctest::Approx(std::pow(k, dim) * base(kx)).epsilon(1e-14));
                }
            }
        }
    }
}

TEST_CASE("log evaluators agree with the log of the density")
{
    for (const std::string& name : kernel_names()) {
        const UnivariateKernel g = make_univariate_kernel(name);
        for (double x = -6.0; x <= 6.0; x += 0.0137) {
            const double v = g(x);
            if (v > 1e-300) {
                CHECK(std::abs(g.log_evaluator(x) - std::log(v)) <= 1e-9);
            } else {
                CHECK(v == 0.0);
            }
        }
        // Far tails stay finite for full-support kernels even where the density underflows.
        if (!g.compact()) {
            CHECK(std::isfinite(g.log_evaluator(60.0)));
        }
    }
}

TEST_CASE("every kernel integrates to one at every dilation")
{
    for (const std::string& name : kernel_names()) {
        const UnivariateKernel g = make_univariate_kernel(name);
        for (int k : {1, 2, 4, 8, 16, 32}) {
            CAPTURE(name);
            CAPTURE(k);
            const double r = g.compact() ? g.support_radius / k : 40.0 / k;
            // Split at the kinks so the adaptive rule sees smooth pieces.
            const double mass = nm::integrate_adaptive([&](double x) { return k * g(k * x); }, -r, 0.0) +
                                nm::integrate_adaptive([&](double x) { return k * g(k * x); }, 0.0, r);
            CHECK(std::abs(mass - 1.0) <= 1e-6);
        }
        double last = 1.0;
        for (double d = 0.05; d < 8.0; d += 0.05) {
            const double t = g.tail_mass(d);
            CHECK(t <= last + 1e-15);
            CHECK(t >= 0.0);
            last = t;
        }
        CHECK(g.tail_mass(40.0) < 1e-12);
    }
}

TEST_CASE("certify_approximate_identity examples")
{
    const ProductKernel gauss = make_product_kernel("gaussian", 1);
    const IdentityReport r = certify_approximate_identity(gauss, {0.5}, {1, 2, 4, 8, 16});
    CHECK(r.passed);
    REQUIRE(r.radii.size() == 1);
    CHECK(r.radii[0].strictly_decreasing);
    CHECK(r.radii[0].outside.back() < 1e-6);
    CHECK(r.radii[0].outside.front() == doctest::Approx(2 * nm::normal_upper_tail(0.5)).epsilon(1e-12));
    CHECK(r.radii[0].outside.front() == doctest::Approx(0.61708).epsilon(1e-5));
    for (const IdentityScaleRow& row : r.scales) {
        CHECK(row.nonnegative);
        CHECK(std::abs(row.mass - 1.0) <= 1e-6);
    }

    const IdentityReport ru =
        certify_approximate_identity(make_product_kernel("uniform-symmetric", 1), {0.5}, {2});
    CHECK(ru.radii[0].outside[0] == 0.0);
    CHECK(ru.passed);
}

TEST_CASE("l1 tails of product kernels")
{
    // ||x||_1 of a 2D laplace vector is Gamma(2, 1): P(> t) = (1 + t) e^-t.
    const ProductKernel lap = make_product_kernel("laplace", 2);
    for (double t : {0.1, 1.0, 3.0, 7.5}) {
        CHECK(lap.l1_tail(t) == doctest::Approx((1 + t) * std::exp(-t)).epsilon(1e-8));
    }
    // 2D uniform on [-1/2, 1/2]^2: |x1|, |x2| have density 2 on [0, 1/2], so P(|x1| + |x2| > t) = 2 (1 - t)^2
    // for 1/2 <= t <= 1.
    const ProductKernel box = make_product_kernel("uniform-symmetric", 2);
    CHECK(box.l1_tail(0.75) == doctest::Approx(2 * 0.25 * 0.25).epsilon(1e-8));
    CHECK(box.l1_tail(1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(make_product_kernel("gaussian", 1).l1_tail(1.0) == doctest::Approx(2 * nm::normal_upper_tail(1.0)));
}

TEST_CASE("check_moment_condition examples")
{
    CHECK(check_moment_condition(make_product_kernel("gaussian", 1), 1.0) ==
          doctest::Approx(std::sqrt(2 / nm::kPi)).epsilon(1e-9));
    CHECK(check_moment_condition(make_product_kernel("uniform-symmetric", 1), 1.0) ==
          doctest::Approx(0.25).epsilon(1e-9));
    const double g2 = check_moment_condition(make_product_kernel("gaussian", 2), 1.0);
    CHECK(std::isfinite(g2));
    CHECK(g2 == doctest::Approx(2 * std::sqrt(2 / nm::kPi)).epsilon(1e-8));
    CHECK(check_moment_condition(make_product_kernel("laplace", 1), 0.5) ==
          doctest::Approx(std::tgamma(1.5)).epsilon(1e-8));
}

TEST_CASE("samplers reproduce the marginal variance")
{
    // Var: gaussian 1, laplace 2, uniform 1/12, epanechnikov 1/5, triangular 1/6.
    const std::map<std::string, double> variance = {{"gaussian", 1.0},
                                                    {"laplace", 2.0},
                                                    {"uniform-symmetric", 1.0 / 12},
                                                    {"epanechnikov", 0.2},
                                                    {"triangular", 1.0 / 6}};
    for (const std::string& name : kernel_names()) {
        const UnivariateKernel g = make_univariate_kernel(name);
        Rng rng(99);
        double s = 0.0, s2 = 0.0;
        constexpr int kCount = 200000;
        for (int i = 0; i < kCount; ++i) {
            const double x = g.sampler(rng);
            s += x;
            s2 += x * x;
        }
        const double var = variance.at(name);
        CAPTURE(name);
        CHECK(std::abs(s / kCount) < 5 * std::sqrt(var / kCount));
        CHECK(s2 / kCount == doctest::Approx(var).epsilon(0.02));
    }
}
