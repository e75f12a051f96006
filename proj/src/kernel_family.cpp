#include "mixapprox/kernel_family.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mixapprox/numeric.hpp"

namespace mixapprox {

namespace {

constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

UnivariateKernel gaussian_kernel()
{
    UnivariateKernel g;
    g.name = "gaussian";
    g.evaluator = [](double x) { return numeric::normal_pdf(x); };
    g.log_evaluator = [](double x) { return numeric::normal_log_pdf(x); };
    g.tail_mass = [](double d) { return d <= 0.0 ? 1.0 : 2.0 * numeric::normal_upper_tail(d); };
    g.sampler = [](Rng& rng) { return numeric::normal_quantile(uniform01(rng)); };
    return g;
}

UnivariateKernel laplace_kernel()
{
    UnivariateKernel g;
    g.name = "laplace";
    g.evaluator = [](double x) { return 0.5 * std::exp(-std::abs(x)); };
    g.log_evaluator = [](double x) { return -std::abs(x) - std::log(2.0); };
    g.tail_mass = [](double d) { return d <= 0.0 ? 1.0 : std::exp(-d); };
    g.sampler = [](Rng& rng) {
        const double u = uniform01(rng) - 0.5;
        return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
    };
    return g;
}

UnivariateKernel uniform_kernel()
{
    UnivariateKernel g;
    g.name = "uniform-symmetric";
    g.support_radius = 0.5;
    g.evaluator = [](double x) {
        const double a = std::abs(x);
        return a < 0.5 ? 1.0 : (a == 0.5 ? 0.5 : 0.0);
    };
    g.log_evaluator = [](double x) {
        const double a = std::abs(x);
        return a < 0.5 ? 0.0 : (a == 0.5 ? -std::log(2.0) : kNegInfinity);
    };
    g.tail_mass = [](double d) { return std::clamp(1.0 - 2.0 * d, 0.0, 1.0); };
    g.sampler = [](Rng& rng) { return uniform01(rng) - 0.5; };
    return g;
}

UnivariateKernel epanechnikov_kernel()
{
    UnivariateKernel g;
    g.name = "epanechnikov";
    g.support_radius = 1.0;
    g.evaluator = [](double x) { return std::abs(x) < 1.0 ? 0.75 * (1.0 - x * x) : 0.0; };
    g.log_evaluator = [](double x) {
        return std::abs(x) < 1.0 ? std::log(0.75) + std::log1p(-x * x) : kNegInfinity;
    };
    g.tail_mass = [](double d) {
        if (d <= 0.0) {
            return 1.0;
        }
        if (d >= 1.0) {
            return 0.0;
        }
        // 1 - 1.5 (d - d^3/3), written as (1-d)^2 (2+d) / 2 to keep precision near d = 1.
        return 0.5 * (1.0 - d) * (1.0 - d) * (2.0 + d);
    };
    g.sampler = [](Rng& rng) {
        // Median of three U(-1, 1) draws has the Epanechnikov law.
        double u[3];
        for (double& v : u) {
            v = 2.0 * uniform01(rng) - 1.0;
        }
        std::sort(u, u + 3);
        return u[1];
    };
    return g;
}

UnivariateKernel triangular_kernel()
{
    UnivariateKernel g;
    g.name = "triangular";
    g.support_radius = 1.0;
    g.evaluator = [](double x) { return std::max(1.0 - std::abs(x), 0.0); };
    g.log_evaluator = [](double x) {
        return std::abs(x) < 1.0 ? std::log1p(-std::abs(x)) : kNegInfinity;
    };
    g.tail_mass = [](double d) {
        const double r = std::clamp(1.0 - d, 0.0, 1.0);
        return r * r;
    };
    g.sampler = [](Rng& rng) { return uniform01(rng) + uniform01(rng) - 1.0; };
    return g;
}

/// Mass of {sum_{i<p} |X_i| > t} for iid X_i ~ g, by conditioning on |X_1|.
double l1_tail_recursive(const UnivariateKernel& g, int p, double t)
{
    if (t <= 0.0) {
        return 1.0;
    }
    if (p == 1) {
        return g.tail_mass(t);
    }
    auto inner = [&g, p, t](double x) { return 2.0 * g(x) * l1_tail_recursive(g, p - 1, t - x); };
    // Break the range where g or the inner tail change smoothness.
    std::vector<double> cuts = {0.0, t};
    if (g.compact()) {
        for (int j = 0; j < p; ++j) {
            for (double c : {g.support_radius, t - j * g.support_radius}) {
                if (c > 0.0 && c < t) {
                    cuts.push_back(c);
                }
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = g.tail_mass(t);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += numeric::integrate_adaptive(inner, cuts[i], cuts[i + 1], 0.0, 1e-10, 40);
    }
    return std::min(total, 1.0);
}

} // namespace

double UnivariateKernel::radius(double tol) const
{
    if (compact()) {
        return support_radius;
    }
    if (!(tol > 0.0 && tol < 1.0)) {
        throw ValidationError("kernel radius: tolerance must lie in (0, 1)");
    }
    double hi = 1.0;
    while (tail_mass(hi) > tol) {
        hi *= 2.0;
    }
    return numeric::bisect([this, tol](double t) { return tail_mass(t) - tol; }, 0.0, hi, 1e-12);
}

double UnivariateKernel::moment(double a) const
{
    if (!(a > 0.0 && a <= 1.0)) {
        throw ValidationError("moment: exponent must lie in (0, 1]");
    }
    auto integrand = [this, a](double x) { return 2.0 * std::pow(x, a) * evaluator(x); };
    if (compact()) {
        return numeric::integrate_adaptive(integrand, 0.0, support_radius, 0.0, 1e-12);
    }
    const double r = radius(1e-16);
    const double near = numeric::integrate_adaptive(integrand, 0.0, r, 0.0, 1e-12);
    const double far = numeric::integrate_adaptive(integrand, r, 2.0 * r, 0.0, 1e-10);
    return far > 1e-8 * near ? kInfinity : near + far;
}

const std::vector<std::string>& kernel_names()
{
    static const std::vector<std::string> names = {"gaussian", "laplace", "uniform-symmetric",
                                                   "epanechnikov", "triangular"};
    return names;
}

UnivariateKernel make_univariate_kernel(std::string_view name)
{
    if (name == "gaussian") {
        return gaussian_kernel();
    }
    if (name == "laplace") {
        return laplace_kernel();
    }
    if (name == "uniform-symmetric") {
        return uniform_kernel();
    }
    if (name == "epanechnikov") {
        return epanechnikov_kernel();
    }
    if (name == "triangular") {
        return triangular_kernel();
    }
    throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

ProductKernel::ProductKernel(UnivariateKernel marginal, int dim)
    : marginal_(std::make_shared<const UnivariateKernel>(std::move(marginal))), dim_(dim)
{
    if (dim < 1 || dim > kMaxDim) {
        throw ValidationError("kernel dimension must be 1, 2 or 3");
    }
}

double ProductKernel::operator()(const Point& x) const
{
    double value = 1.0;
    for (int i = 0; i < dim_ && value != 0.0; ++i) {
        value *= marginal_->evaluator(x[i]);
    }
    return value;
}

double ProductKernel::log_eval(const Point& x) const
{
    double value = 0.0;
    for (int i = 0; i < dim_; ++i) {
        value += marginal_->log_evaluator(x[i]);
    }
    return value;
}

Point ProductKernel::sample(Rng& rng) const
{
    Point z(dim_);
    for (int i = 0; i < dim_; ++i) {
        z[i] = marginal_->sampler(rng);
    }
    return z;
}

double ProductKernel::l1_tail(double t) const
{
    return l1_tail_recursive(*marginal_, dim_, t);
}

double ProductKernel::radius(double tol) const
{
    return marginal_->radius(tol / dim_);
}

ProductKernel make_product_kernel(std::string_view marginal_name, int dim)
{
    return ProductKernel(make_univariate_kernel(marginal_name), dim);
}

Dilation::Dilation(ProductKernel base, int k) : base_(std::move(base)), k_(k)
{
    if (k < 1) {
        throw ValidationError("dilation index k must be a positive integer");
    }
}

double Dilation::operator()(const Point& x) const
{
    return std::pow(static_cast<double>(k_), dim()) * base_(k_ * x);
}

double Dilation::log_eval(const Point& x) const
{
    return dim() * std::log(static_cast<double>(k_)) + base_.log_eval(k_ * x);
}

Point Dilation::sample(Rng& rng) const
{
    return base_.sample(rng) / k_;
}

Dilation dilate(const ProductKernel& kernel, int k)
{
    return Dilation(kernel, k);
}

IdentityReport certify_approximate_identity(const ProductKernel& kernel,
                                            const std::vector<double>& deltas,
                                            const std::vector<int>& ks)
{
    if (ks.empty() || !std::is_sorted(ks.begin(), ks.end()) ||
        std::adjacent_find(ks.begin(), ks.end()) != ks.end()) {
        throw ValidationError("certify_approximate_identity: ks must be strictly increasing");
    }
    for (double d : deltas) {
        if (!(d > 0.0)) {
            throw ValidationError("certify_approximate_identity: radii must be positive");
        }
    }
    IdentityReport report;
    report.kernel = kernel.name();
    report.dim = kernel.dim();
    bool ok = true;

    const int points = kernel.dim() == 3 ? 201 : 801;
    for (int k : ks) {
        const Dilation alpha(kernel, k);
        const double r = alpha.radius(1e-13);
        const TensorGrid grid(SupportBox::cube(kernel.dim(), -r, r), points, QuadratureRule::simpson);
        // Edge nodes take the inner one-sided limit, so a jump at the support edge
        // is integrated as the closed-interval density it is.
        const GridFunction values = GridFunction::sample(
            grid, [&alpha](const Point& x) { return alpha(x * (1.0 - 1e-12)); });
        IdentityScaleRow row;
        row.k = k;
        row.mass = (values.values * grid.tensor_weights()).sum();
        row.min_value = values.values.minCoeff();
        row.nonnegative = row.min_value >= 0.0;
        row.unit_mass = std::abs(row.mass - 1.0) <= 1e-6;
        ok = ok && row.nonnegative && row.unit_mass;
        report.scales.push_back(row);
    }

    for (double delta : deltas) {
        IdentityRadiusRow row;
        row.delta = delta;
        for (int k : ks) {
            row.outside.push_back(Dilation(kernel, k).outside_mass(delta));
        }
        row.nonincreasing = true;
        row.strictly_decreasing = true;
        for (std::size_t i = 1; i < row.outside.size(); ++i) {
            row.nonincreasing = row.nonincreasing && row.outside[i] <= row.outside[i - 1];
            row.strictly_decreasing = row.strictly_decreasing && row.outside[i] < row.outside[i - 1];
        }
        row.final_below = row.outside.back() < 0.01;
        ok = ok && row.nonincreasing && row.final_below;
        report.radii.push_back(std::move(row));
    }
    report.passed = ok;
    return report;
}

double check_moment_condition(const ProductKernel& kernel, double a)
{
    if (!(a > 0.0 && a <= 1.0)) {
        throw ValidationError("check_moment_condition: exponent must lie in (0, 1]");
    }
    // E ||X||_1^a = int_0^inf P(||X||_1^a > u) du.
    auto integrand = [&kernel, a](double u) { return kernel.l1_tail(std::pow(u, 1.0 / a)); };
    const UnivariateKernel& g = kernel.marginal();
    const double reach = kernel.dim() * (g.compact() ? g.support_radius : g.radius(1e-16));
    const double upper = std::pow(reach, a);
    const double near = numeric::integrate_adaptive(integrand, 0.0, upper, 0.0, 1e-10, 40);
    if (g.compact()) {
        return near;
    }
    const double far = numeric::integrate_adaptive(integrand, upper, 2.0 * upper, 0.0, 1e-8, 40);
    return far > 1e-8 * near ? kInfinity : near + far;
}

} // namespace mixapprox
