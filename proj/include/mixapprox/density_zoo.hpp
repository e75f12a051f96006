#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mixapprox/common.hpp"
#include "mixapprox/grid.hpp"

namespace mixapprox {

/// A probability density on a compact box with certified bounds and Lipschitz data.
///
/// The evaluator is zero outside `support`. `beta_lower > 0` is the lower-bounded
/// class used by the KL results; the zoo also ships a tent that touches zero at its
/// endpoints, which is Lipschitz on all of R^p but has beta_lower = 0.
struct TargetDensity {
    std::string name;
    int dim = 1;
    SupportBox support = SupportBox::cube(1, 0.0, 1.0);
    double beta_lower = 0.0;
    double beta_upper = 0.0;
    double lipschitz_exponent = 1.0;
    /// Constant in |f(x) - f(y)| <= C ||x - y||_inf^a on the support.
    double lipschitz_constant = 0.0;
    std::function<double(const Point&)> evaluator;
    /// Draws one point; callers own the random stream.
    std::function<Point(Rng&)> sampler;

    double operator()(const Point& x) const { return evaluator(x); }
    Point sample(Rng& rng) const { return sampler(rng); }
    Samples sample(Rng& rng, Eigen::Index count) const;
    bool in_f5() const { return beta_lower > 0.0; }
};

/// Zoo identifiers: uniform-box, clipped-cosine, truncated-normal, tent,
/// truncated-normal-mixture. All are products of one univariate marginal.
const std::vector<std::string>& zoo_names();

TargetDensity make_target(std::string_view name, int dim);

/// Default per-axis resolution for tensor quadrature over a support: 2049 / 513 / 129.
int default_points_per_axis(int dim);

/// Simpson grid exactly covering the support at the default resolution.
TensorGrid default_grid(const TargetDensity& f);

struct MembershipReport {
    double measured_min = 0.0;
    double measured_mass = 0.0;
    double declared_beta = 0.0;
    bool lower_bound_ok = false;
    bool mass_ok = false;
    bool passed = false;
};

/// Checks f >= beta_lower on the grid nodes inside the support and unit mass within 1e-6.
MembershipReport verify_f5_membership(const TargetDensity& f, const TensorGrid& grid);

/// Largest |f(x) - f(y)| / ||x - y||_inf^a over axis-adjacent grid nodes.
double estimate_lipschitz(const TargetDensity& f, const TensorGrid& grid, double exponent);

} // namespace mixapprox
