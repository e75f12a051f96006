#pragma once

#include <functional>
#include <string>

#include "mixapprox/common.hpp"
#include "mixapprox/density_zoo.hpp"
#include "mixapprox/grid.hpp"

namespace mixapprox {

/// Order q of an L_q norm; q = infinity selects the sup over nodes.
double lq_norm(const GridFunction& h, double q);

/// Half the L1 distance; both arguments must share one grid.
double tv_distance(const GridFunction& f, const GridFunction& g);

/// int f log(f / g) over the nodes where f > 0. No renormalisation of g is applied,
/// so the value is the divergence over the grid's box.
double kl_divergence(const GridFunction& f, const GridFunction& g);

/// Same divergence with log g supplied directly, for approximants that underflow.
double kl_divergence(const GridFunction& f, const Array& log_g);

using DensityFn = std::function<double(const Point&)>;

/// Root mean square of f - g over the sample rows (the metric d_n, not its square).
double empirical_distance(const DensityFn& f, const DensityFn& g, const Samples& xs);

struct KlL2Check {
    double kl = 0.0;
    double l2_squared = 0.0;
    double beta = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

/// KL(f, g) against ||f - g||_2^2 / beta with beta the smaller of the two lower bounds.
KlL2Check kl_l2_bound_check(const GridFunction& f, double beta_f, const GridFunction& g);

/// f is sampled on g's grid, which must span f's support exactly.
KlL2Check kl_l2_bound_check(const TargetDensity& f, const GridFunction& g);

} // namespace mixapprox
