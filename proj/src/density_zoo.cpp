#include "mixapprox/density_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mixapprox/numeric.hpp"

namespace mixapprox {

namespace {

using numeric::kPi;

/// Univariate building block; zoo targets are products of one of these per axis.
struct Marginal {
    double lower = 0.0;
    double upper = 1.0;
    double beta_lower = 0.0;
    double beta_upper = 0.0;
    double lipschitz = 0.0;
    std::function<double(double)> pdf;
    std::function<double(Rng&)> draw;
};

Marginal uniform_marginal()
{
    Marginal m;
    m.beta_lower = m.beta_upper = 1.0;
    m.pdf = [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; };
    m.draw = [](Rng& rng) { return uniform01(rng); };
    return m;
}

Marginal clipped_cosine_marginal()
{
    // max(1 + cos(2 pi (x - 1/2)), 1) on [0, 1]; the clip meets the bump at x = 1/4, 3/4.
    const double z = 1.0 + 1.0 / kPi;
    Marginal m;
    m.beta_lower = 1.0 / z;
    m.beta_upper = 2.0 / z;
    m.lipschitz = 2.0 * kPi / z;
    m.pdf = [z](double x) {
        if (x < 0.0 || x > 1.0) {
            return 0.0;
        }
        return std::max(1.0 + std::cos(2.0 * kPi * (x - 0.5)), 1.0) / z;
    };
    const double envelope = m.beta_upper;
    auto pdf = m.pdf;
    m.draw = [pdf, envelope](Rng& rng) {
        for (;;) {
            const double x = uniform01(rng);
            if (uniform01(rng) * envelope <= pdf(x)) {
                return x;
            }
        }
    };
    return m;
}

/// Normal(mu, sigma^2) truncated to [lo, hi].
struct TruncatedNormal {
    double mu, sigma, lo, hi, cdf_lo, mass;

    TruncatedNormal(double mu_, double sigma_, double lo_, double hi_)
        : mu(mu_), sigma(sigma_), lo(lo_), hi(hi_),
          cdf_lo(numeric::normal_cdf((lo_ - mu_) / sigma_)),
          mass(numeric::normal_cdf((hi_ - mu_) / sigma_) - cdf_lo)
    {
    }

    double pdf(double x) const
    {
        if (x < lo || x > hi) {
            return 0.0;
        }
        return numeric::normal_pdf((x - mu) / sigma) / (sigma * mass);
    }

    double derivative(double x) const
    {
        const double z = (x - mu) / sigma;
        return -z * numeric::normal_pdf(z) / (sigma * sigma * mass);
    }

    double draw(Rng& rng) const
    {
        const double u = cdf_lo + uniform01(rng) * mass;
        return std::clamp(mu + sigma * numeric::normal_quantile(u), lo, hi);
    }
};

Marginal truncated_normal_marginal()
{
    const TruncatedNormal tn(0.0, 1.0, -1.0, 1.0);
    Marginal m;
    m.lower = -1.0;
    m.upper = 1.0;
    m.beta_lower = tn.pdf(1.0);
    m.beta_upper = tn.pdf(0.0);
    // sup |x phi(x)| on [-1, 1] is attained at the endpoints.
    m.lipschitz = numeric::normal_pdf(1.0) / tn.mass;
    m.pdf = [tn](double x) { return tn.pdf(x); };
    m.draw = [tn](Rng& rng) { return tn.draw(rng); };
    return m;
}

Marginal tent_marginal()
{
    Marginal m;
    m.beta_lower = 0.0;
    m.beta_upper = 2.0;
    m.lipschitz = 4.0;
    m.pdf = [](double x) {
        if (x < 0.0 || x > 1.0) {
            return 0.0;
        }
        return 2.0 - std::abs(4.0 * x - 2.0);
    };
    m.draw = [](Rng& rng) {
        const double u = uniform01(rng);
        return u <= 0.5 ? std::sqrt(0.5 * u) : 1.0 - std::sqrt(0.5 * (1.0 - u));
    };
    return m;
}

Marginal truncated_normal_mixture_marginal()
{
    constexpr double sigma = 0.15;
    const TruncatedNormal left(0.3, sigma, 0.0, 1.0);
    const TruncatedNormal right(0.7, sigma, 0.0, 1.0);
    Marginal m;
    m.pdf = [left, right](double x) { return 0.5 * (left.pdf(x) + right.pdf(x)); };
    // Increasing on [0, 0.3], local minimum at the symmetry point 1/2 which lies above f(0).
    m.beta_lower = m.pdf(0.0);
    auto slope = [left, right](double x) { return 0.5 * (left.derivative(x) + right.derivative(x)); };
    const double mode = numeric::bisect(slope, 0.2, 0.4);
    m.beta_upper = m.pdf(mode);
    // Each component's slope is bounded by phi(1) / (sigma^2 * mass).
    m.lipschitz = numeric::normal_pdf(1.0) / (sigma * sigma * left.mass);
    m.draw = [left, right](Rng& rng) {
        return uniform01(rng) < 0.5 ? left.draw(rng) : right.draw(rng);
    };
    return m;
}

Marginal make_marginal(std::string_view name)
{
    if (name == "uniform-box") {
        return uniform_marginal();
    }
    if (name == "clipped-cosine") {
        return clipped_cosine_marginal();
    }
    if (name == "truncated-normal") {
        return truncated_normal_marginal();
    }
    if (name == "tent") {
        return tent_marginal();
    }
    if (name == "truncated-normal-mixture") {
        return truncated_normal_mixture_marginal();
    }
    throw ValidationError("unknown density '" + std::string(name) + "'");
}

} // namespace

Samples TargetDensity::sample(Rng& rng, Eigen::Index count) const
{
    Samples xs(count, dim);
    for (Eigen::Index i = 0; i < count; ++i) {
        xs.row(i) = sampler(rng).transpose();
    }
    return xs;
}

const std::vector<std::string>& zoo_names()
{
    static const std::vector<std::string> names = {
        "uniform-box", "clipped-cosine", "truncated-normal", "tent", "truncated-normal-mixture"};
    return names;
}

TargetDensity make_target(std::string_view name, int dim)
{
    if (dim < 1 || dim > kMaxDim) {
        throw ValidationError("density dimension must be 1, 2 or 3");
    }
    auto marginal = std::make_shared<const Marginal>(make_marginal(name));

    TargetDensity f;
    f.name = std::string(name);
    f.dim = dim;
    f.support = SupportBox::cube(dim, marginal->lower, marginal->upper);
    f.beta_lower = std::pow(marginal->beta_lower, dim);
    f.beta_upper = std::pow(marginal->beta_upper, dim);
    f.lipschitz_exponent = 1.0;
    // One coordinate moves at a time: |df| <= sum_i L * prod_{j != i} beta_upper.
    f.lipschitz_constant = dim * marginal->lipschitz * std::pow(marginal->beta_upper, dim - 1);
    f.evaluator = [marginal, dim](const Point& x) {
        double value = 1.0;
        for (int i = 0; i < dim && value != 0.0; ++i) {
            value *= marginal->pdf(x[i]);
        }
        return value;
    };
    f.sampler = [marginal, dim](Rng& rng) {
        Point x(dim);
        for (int i = 0; i < dim; ++i) {
            x[i] = marginal->draw(rng);
        }
        return x;
    };
    return f;
}

int default_points_per_axis(int dim)
{
    switch (dim) {
    case 1:
        return 2049;
    case 2:
        return 513;
    case 3:
        return 129;
    default:
        throw ValidationError("density dimension must be 1, 2 or 3");
    }
}

TensorGrid default_grid(const TargetDensity& f)
{
    return TensorGrid(f.support, default_points_per_axis(f.dim), QuadratureRule::simpson);
}

MembershipReport verify_f5_membership(const TargetDensity& f, const TensorGrid& grid)
{
    if (grid.dim() != f.dim || !grid.box().contains(f.support, 1e-12)) {
        throw ValidationError("verify_f5_membership: grid does not cover the support");
    }
    MembershipReport report;
    report.declared_beta = f.beta_lower;
    report.measured_min = std::numeric_limits<double>::infinity();
    double mass = 0.0;
    const Array& w = grid.tensor_weights();
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Point x = grid.node(i);
        const double v = f(x);
        mass += w[i] * v;
        if (f.support.contains(x)) {
            report.measured_min = std::min(report.measured_min, v);
        }
    }
    report.measured_mass = mass;
    report.lower_bound_ok =
        f.beta_lower > 0.0 && report.measured_min >= f.beta_lower * (1.0 - 1e-12);
    report.mass_ok = std::abs(mass - 1.0) <= 1e-6;
    report.passed = report.lower_bound_ok && report.mass_ok;
    return report;
}

double estimate_lipschitz(const TargetDensity& f, const TensorGrid& grid, double exponent)
{
    if (!(exponent > 0.0 && exponent <= 1.0)) {
        throw ValidationError("estimate_lipschitz: exponent must lie in (0, 1]");
    }
    for (int n : grid.counts()) {
        if (n < 64) {
            throw ValidationError("estimate_lipschitz: need at least 64 points per axis");
        }
    }
    const GridFunction values = GridFunction::sample(grid, f.evaluator);
    double best = 0.0;
    Eigen::Index stride = 1;
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const double step = std::pow(grid.spacing(axis), exponent);
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            if (grid.unravel(i)[axis] + 1 < grid.count(axis)) {
                best = std::max(best, std::abs(values.values[i + stride] - values.values[i]) / step);
            }
        }
        stride *= grid.count(axis);
    }
    return best;
}

} // namespace mixapprox
