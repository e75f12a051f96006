#include "mixapprox/divergences.hpp"

#include <cmath>

namespace mixapprox {

namespace {

void require_finite(const GridFunction& h, const char* what)
{
    if (!h.values.allFinite()) {
        throw ValidationError(std::string(what) + ": non-finite values");
    }
}

void require_common_grid(const GridFunction& f, const GridFunction& g, const char* what)
{
    if (!f.grid.same_layout(g.grid)) {
        throw ValidationError(std::string(what) + ": arguments live on different grids");
    }
}

} // namespace

double lq_norm(const GridFunction& h, double q)
{
    if (!(q >= 1.0)) {
        throw ValidationError("lq_norm: order must be at least 1");
    }
    require_finite(h, "lq_norm");
    if (std::isinf(q)) {
        return h.values.abs().maxCoeff();
    }
    const Array& w = h.grid.tensor_weights();
    if (q == 1.0) {
        return (w * h.values.abs()).sum();
    }
    if (q == 2.0) {
        return std::sqrt((w * h.values.square()).sum());
    }
    return std::pow((w * h.values.abs().pow(q)).sum(), 1.0 / q);
}

double tv_distance(const GridFunction& f, const GridFunction& g)
{
    require_common_grid(f, g, "tv_distance");
    return 0.5 * lq_norm(GridFunction(f.grid, f.values - g.values), 1.0);
}

double kl_divergence(const GridFunction& f, const Array& log_g)
{
    require_finite(f, "kl_divergence");
    if (log_g.size() != f.values.size()) {
        throw ValidationError("kl_divergence: log density has the wrong length");
    }
    const Array& w = f.grid.tensor_weights();
    const double floor = std::log(1e-300);
    double total = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double fi = f.values[i];
        if (fi <= 0.0) {
            continue;
        }
        if (!(log_g[i] >= floor)) {
            throw SupportError("kl_divergence: approximant vanishes where the target is positive");
        }
        total += w[i] * fi * (std::log(fi) - log_g[i]);
    }
    return (total < 0.0 && total >= -1e-9) ? 0.0 : total;
}

double kl_divergence(const GridFunction& f, const GridFunction& g)
{
    require_common_grid(f, g, "kl_divergence");
    require_finite(g, "kl_divergence");
    // log of a nonpositive value is -inf or NaN; both fail the floor test.
    return kl_divergence(f, g.values.max(0.0).log());
}

double empirical_distance(const DensityFn& f, const DensityFn& g, const Samples& xs)
{
    if (xs.rows() == 0) {
        throw ValidationError("empirical_distance: empty sample");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const Point x = xs.row(i).transpose();
        const double d = f(x) - g(x);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(xs.rows()));
}

KlL2Check kl_l2_bound_check(const GridFunction& f, double beta_f, const GridFunction& g)
{
    require_common_grid(f, g, "kl_l2_bound_check");
    const double g_min = g.values.minCoeff();
    if (!(g_min > 0.0) || !(beta_f > 0.0)) {
        throw SupportError("kl_l2_bound_check: both densities must be bounded below on the box");
    }
    KlL2Check out;
    out.beta = std::min(beta_f, g_min);
    out.kl = kl_divergence(f, g);
    const double l2 = lq_norm(GridFunction(f.grid, f.values - g.values), 2.0);
    out.l2_squared = l2 * l2;
    out.rhs = out.l2_squared / out.beta;
    out.passed = out.kl <= out.rhs * (1.0 + 1e-6);
    return out;
}

KlL2Check kl_l2_bound_check(const TargetDensity& f, const GridFunction& g)
{
    if (!g.grid.box().approx_equal(f.support)) {
        throw ValidationError("kl_l2_bound_check: grid box must equal the target's support");
    }
    return kl_l2_bound_check(GridFunction::sample(g.grid, f.evaluator), f.beta_lower, g);
}

} // namespace mixapprox
