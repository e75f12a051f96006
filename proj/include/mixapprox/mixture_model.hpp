#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mixapprox/common.hpp"
#include "mixapprox/density_zoo.hpp"
#include "mixapprox/grid.hpp"
#include "mixapprox/grid_engine.hpp"
#include "mixapprox/kernel_family.hpp"

namespace mixapprox {

/// The cube [lower, upper]^p that holds every component mean. lower == upper is
/// accepted as the degenerate box.
struct MeanBox {
    double lower = 0.0;
    double upper = 1.0;
    int dim = 1;

    MeanBox() = default;
    MeanBox(double lower, double upper, int dim);

    double width() const { return upper - lower; }
    bool contains(const Point& m, double slack = 0.0) const;
    Point clamp(const Point& m) const;
    SupportBox as_support() const;
};

/// theta of the likelihood: simplex weights, one mean per row, shared integer scale.
struct MixtureParams {
    Vector weights;
    Matrix means;
    int k = 1;

    Eigen::Index n() const { return weights.size(); }
};

/// f(x) = sum_i pi_i k^p g(k x - k m_i).
class FiniteMixture {
public:
    FiniteMixture(ProductKernel kernel, MixtureParams params);

    Eigen::Index n() const { return params_.n(); }
    int dim() const { return kernel_.dim(); }
    int k() const { return params_.k; }
    const Vector& weights() const { return params_.weights; }
    const Matrix& means() const { return params_.means; }
    const MixtureParams& params() const { return params_; }
    const ProductKernel& kernel() const { return kernel_; }

    double operator()(const Point& x) const;
    /// log f(x) by log-sum-exp; -infinity where every component vanishes.
    double log_eval(const Point& x) const;
    Point sample(Rng& rng) const;
    bool within(const MeanBox& box) const;

    GridFunction on_grid(const TensorGrid& grid) const;
    Array log_on_grid(const TensorGrid& grid) const;

private:
    ProductKernel kernel_;
    MixtureParams params_;
    double log_scale_;
};

double mixture_eval(const FiniteMixture& mix, const Point& x);
Samples mixture_sample(const FiniteMixture& mix, std::uint64_t seed, Eigen::Index count);

/// sum_j log sum_i pi_i k^p g(k X_j - k m_i); -infinity if some sample has zero density.
double log_likelihood(const MixtureParams& params, const ProductKernel& kernel, const Samples& xs);

enum class EmInit { quantiles, uniform };

struct EmOptions {
    int max_iters = 500;
    double tol = 1e-8;
    EmInit init = EmInit::quantiles;
};

struct EmResult {
    MixtureParams params;
    /// Log-likelihood at the start and after every iteration.
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    double log_likelihood() const { return trace.back(); }
};

/// Projected EM at fixed k: means are clamped to the box after every M-step.
/// Gaussian marginals use the weighted mean, laplace the weighted median.
EmResult em_fit(const Samples& xs, int n, int k, const ProductKernel& kernel, const MeanBox& box,
                std::uint64_t init_seed, const EmOptions& options = {});

struct MleResult {
    EmResult best;
    int k = 0;
    int restart = 0;
    /// Best log-likelihood per entry of k_grid.
    std::vector<double> per_k;
};

/// Best em_fit over k_grid x restarts. Restart 0 starts at quantiles, later ones
/// draw means uniformly in the box from derive_seed(seed, restart).
MleResult mle_fit(const Samples& xs, int n, const std::vector<int>& k_grid, const ProductKernel& kernel,
                  const MeanBox& box, int restarts, std::uint64_t seed, const EmOptions& options = {});

/// Finite set of candidate components: a tensor lattice of means at one scale k.
class Dictionary {
public:
    Dictionary(ProductKernel kernel, int k, std::vector<Vector> axis_means);

    static Dictionary lattice(const ProductKernel& kernel, int k, const MeanBox& box, int points_per_axis);

    const ProductKernel& kernel() const { return kernel_; }
    int k() const { return k_; }
    int dim() const { return kernel_.dim(); }
    Eigen::Index size() const { return size_; }
    const Vector& axis_means(int axis) const { return axis_means_[axis]; }
    Point mean(Eigen::Index flat) const;
    /// k^p g(k x - k m) for dictionary element `flat`.
    double element(Eigen::Index flat, const Point& x) const;

private:
    ProductKernel kernel_;
    int k_;
    std::vector<Vector> axis_means_;
    Eigen::Index size_;
};

enum class GreedyObjective { l2, kl };

GreedyObjective parse_objective(std::string_view name);

struct GreedyResult {
    std::vector<FiniteMixture> iterates;  // iterates[n-1] has n components
    std::vector<double> objective;        // squared L2 gap or KL to the target
};

/// Frank-Wolfe: f_n = (1 - lambda) f_{n-1} + lambda phi, with phi and lambda chosen to
/// minimise the objective against `target` over its grid.
GreedyResult greedy_fit(const GridFunction& target, const Dictionary& dictionary, int n_max,
                        GreedyObjective objective);

/// f * alpha_k with the target acting as mixing density over the means.
struct MixingApproximant {
    TargetDensity target;
    ProductKernel kernel;
    int k = 1;
    GridFunction realized;
};

/// realized = convolve(zero_extend(target), alpha_k) on `out_grid`.
MixingApproximant make_mixing_approximant(const TargetDensity& target, const ProductKernel& kernel, int k,
                                          const TensorGrid& out_grid);

} // namespace mixapprox
