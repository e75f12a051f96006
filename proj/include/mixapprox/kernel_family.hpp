#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mixapprox/common.hpp"
#include "mixapprox/grid.hpp"

namespace mixapprox {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A symmetric univariate density g, the marginal of a product kernel.
///
/// Compactly supported marginals take the midpoint value at their support edge
/// where they jump (the uniform gives 1/2 at |x| = 1/2).
struct UnivariateKernel {
    std::string name;
    std::function<double(double)> evaluator;
    /// Exact log density; -infinity where the density vanishes.
    std::function<double(double)> log_evaluator;
    /// Mass outside [-delta, delta].
    std::function<double(double)> tail_mass;
    std::function<double(Rng&)> sampler;
    /// Half-width of the support; +infinity for full support.
    double support_radius = kInfinity;

    double operator()(double x) const { return evaluator(x); }
    bool compact() const { return support_radius < kInfinity; }
    /// Smallest t with tail_mass(t) <= tol.
    double radius(double tol) const;
    /// int |x|^a g(x) dx, or +infinity when the truncated integral does not settle.
    double moment(double a) const;
};

const std::vector<std::string>& kernel_names();
UnivariateKernel make_univariate_kernel(std::string_view name);

/// alpha(x) = prod_i g(x_i) with one shared marginal g.
class ProductKernel {
public:
    ProductKernel(UnivariateKernel marginal, int dim);

    int dim() const { return dim_; }
    const UnivariateKernel& marginal() const { return *marginal_; }
    const std::string& name() const { return marginal_->name; }

    double operator()(const Point& x) const;
    double log_eval(const Point& x) const;
    Point sample(Rng& rng) const;

    /// Mass of {x : ||x||_1 > t}.
    double l1_tail(double t) const;
    /// Per-axis half-width R such that the mass outside [-R, R]^p is at most tol.
    double radius(double tol) const;

private:
    std::shared_ptr<const UnivariateKernel> marginal_;
    int dim_;
};

ProductKernel make_product_kernel(std::string_view marginal_name, int dim);

/// alpha_k(x) = k^p alpha(k x).
class Dilation {
public:
    Dilation(ProductKernel base, int k);

    const ProductKernel& base() const { return base_; }
    int k() const { return k_; }
    int dim() const { return base_.dim(); }

    double operator()(const Point& x) const;
    double log_eval(const Point& x) const;
    /// One axis factor k g(k t).
    double marginal(double t) const { return k_ * base_.marginal()(k_ * t); }
    Point sample(Rng& rng) const;

    /// Mass of alpha_k outside the l1 ball of radius delta.
    double outside_mass(double delta) const { return base_.l1_tail(k_ * delta); }
    double radius(double tol) const { return base_.radius(tol) / k_; }

private:
    ProductKernel base_;
    int k_;
};

Dilation dilate(const ProductKernel& kernel, int k);

struct IdentityScaleRow {
    int k = 0;
    double mass = 0.0;
    double min_value = 0.0;
    bool nonnegative = false;
    bool unit_mass = false;
};

struct IdentityRadiusRow {
    double delta = 0.0;
    std::vector<double> outside;  // one per k, in input order
    bool nonincreasing = false;
    bool strictly_decreasing = false;
    bool final_below = false;     // last value < 0.01
};

struct IdentityReport {
    std::string kernel;
    int dim = 1;
    std::vector<IdentityScaleRow> scales;
    std::vector<IdentityRadiusRow> radii;
    bool passed = false;
};

/// Checks (i) nonnegativity, (ii) unit mass within 1e-6 and (iii) vanishing outside-delta
/// mass for the dilations alpha_k, k in ks.
IdentityReport certify_approximate_identity(const ProductKernel& kernel,
                                            const std::vector<double>& deltas,
                                            const std::vector<int>& ks);

/// int ||x||_1^a alpha(x) dx; +infinity flags divergence.
double check_moment_condition(const ProductKernel& kernel, double a);

} // namespace mixapprox
