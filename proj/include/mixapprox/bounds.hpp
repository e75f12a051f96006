#pragma once

#include <string>
#include <vector>

#include "mixapprox/common.hpp"
#include "mixapprox/density_zoo.hpp"
#include "mixapprox/grid.hpp"
#include "mixapprox/kernel_family.hpp"
#include "mixapprox/mixture_model.hpp"

namespace mixapprox {

/// A sup over a probe lattice, repeated on the lattice refined by one doubling.
struct ProbeSup {
    double value = 0.0;   // refined value; +infinity when the ratio is unbounded
    double coarse = 0.0;
    bool infinite = false;
    bool flagged = false; // levels disagree by more than 1%
};

/// sup over x in domain and m1, m2 in box of log [k^p g(kx - km1) / k^p g(kx - km2)].
ProbeSup compute_A_logratio(const ProductKernel& kernel, int k, const MeanBox& box,
                            const SupportBox& domain, int probes = 256);

/// 4 (log(3 sqrt(e)) + A).
double compute_gamma(double A);

/// int_K [int (k^p g)^2 dPi / int k^p g dPi] dx with dPi = f(m) dm.
double compute_C_ratio(const MixingApproximant& mixing, const TensorGrid& domain);
/// Same with a discrete mixing measure.
double compute_C_ratio(const FiniteMixture& mixing, const TensorGrid& domain);

/// int_K [int (k^p g)^2 dPi / (int k^p g dPi)^2] f(x) dx.
double compute_C_weighted(const MixingApproximant& mixing, const TargetDensity& f, const TensorGrid& domain);
double compute_C_weighted(const FiniteMixture& mixing, const TargetDensity& f, const TensorGrid& domain);

double hull_kl_rhs(double epsilon, double beta, double C, double n);
double mle_kl_rhs(double epsilon, double beta, double gamma, double C_star, double n, double N,
                  double A_box, double B, int p);
double mle_rate_rhs(double epsilon, double beta, double C1, double C2, double n, double N);
double concentration_rhs(double epsilon, double beta_lower, double beta_upper, double n, double N,
                         double dudley_integral, double t, double C_universal);

/// sup |log k^p g(kx - km1) - log k^p g(kx - km2)| / ||m1 - m2||_1 over distinct probe pairs.
ProbeSup estimate_B_lipschitz(const ProductKernel& kernel, int k, const MeanBox& box,
                              const SupportBox& domain, int probes = 256);

/// Pairwise empirical distances d_n between dictionary elements over the sample rows.
Matrix empirical_distances(const Dictionary& dictionary, const Samples& xs);

/// Size of a greedy cover by closed d_n balls of radius delta.
Eigen::Index covering_number(const Dictionary& dictionary, double delta, const Samples& xs);

struct CoveringProfile {
    std::vector<double> deltas;          // decreasing
    std::vector<Eigen::Index> greedy;    // raw greedy cover sizes
    std::vector<Eigen::Index> covering;  // running minimum, nonincreasing in delta
    Eigen::Index dictionary_size = 0;
};

/// Covers at deltas = upper * 2^-j, j = 0..levels; a cover at a smaller radius also covers
/// the larger one, so the running minimum is a valid and monotone estimate.
CoveringProfile covering_profile(const Dictionary& dictionary, const Samples& xs, double upper, int levels = 8);

/// int_0^upper sqrt(log N(delta)) d delta as the upper sum over the dyadic profile,
/// each band [delta_{j+1}, delta_j] charged with N(delta_{j+1}).
double dudley_integral(const CoveringProfile& profile);

/// One evaluated bound against a measured value.
struct BoundReport {
    std::string bound_name;
    double rhs = 0.0;
    double measured = 0.0;
    bool dominated = false;
    double n = 0.0;
    double N = 0.0;
    double epsilon = 0.0;
    int k = 0;
};

BoundReport make_bound_report(std::string name, double rhs, double measured, double n = 0.0,
                              double N = 0.0, double epsilon = 0.0, int k = 0);

} // namespace mixapprox
