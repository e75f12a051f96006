#include "mixapprox/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mixapprox/grid_engine.hpp"

namespace mixapprox {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// L(i, j) = log g(k (x_i - m_j)) on one axis. The k^p factor cancels in every ratio.
Matrix log_table(const UnivariateKernel& g, int k, const Vector& x, const Vector& m)
{
    Matrix table(x.size(), m.size());
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            table(i, j) = g.log_evaluator(k * (x[i] - m[j]));
        }
    }
    return table;
}

double axis_log_ratio_sup(const UnivariateKernel& g, int k, double m_lo, double m_hi, double x_lo,
                          double x_hi, int probes)
{
    const Matrix table = log_table(g, k, Vector::LinSpaced(probes, x_lo, x_hi),
                                   Vector::LinSpaced(probes, m_lo, m_hi));
    double sup = 0.0;
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        const double top = table.row(i).maxCoeff();
        const double bottom = table.row(i).minCoeff();
        if (bottom == kNegInf) {
            return kInfinity;
        }
        sup = std::max(sup, top - bottom);
    }
    return sup;
}

double axis_log_lipschitz_sup(const UnivariateKernel& g, int k, double m_lo, double m_hi, double x_lo,
                              double x_hi, int probes)
{
    const Vector m = Vector::LinSpaced(probes, m_lo, m_hi);
    const Matrix table = log_table(g, k, Vector::LinSpaced(probes, x_lo, x_hi), m);
    if (!table.allFinite()) {
        throw SupportError("estimate_B_lipschitz: log kernel is not finite on the probes");
    }
    double sup = 0.0;
    for (Eigen::Index a = 0; a < m.size(); ++a) {
        for (Eigen::Index b = a + 1; b < m.size(); ++b) {
            const double gap = (table.col(a) - table.col(b)).cwiseAbs().maxCoeff();
            sup = std::max(sup, gap / (m[b] - m[a]));
        }
    }
    return sup;
}

template <typename AxisSup>
ProbeSup refine(AxisSup axis_sup, int probes)
{
    if (probes < 2) {
        throw ValidationError("probe lattice needs at least 2 points per axis");
    }
    ProbeSup out;
    out.coarse = axis_sup(probes);
    out.value = axis_sup(2 * probes - 1);
    out.infinite = std::isinf(out.value);
    out.flagged = !out.infinite && std::abs(out.value - out.coarse) > 0.01 * std::abs(out.value);
    return out;
}

struct MixingMoments {
    Array first;   // int k^p g dPi at domain nodes
    Array second;  // int (k^p g)^2 dPi
};

MixingMoments moments(const MixingApproximant& mixing, const TensorGrid& domain)
{
    const GridFunction f = GridFunction::sample(default_grid(mixing.target), mixing.target.evaluator);
    const Dilation alpha(mixing.kernel, mixing.k);
    auto once = [&alpha](double t) { return alpha.marginal(t); };
    auto twice = [&alpha](double t) {
        const double v = alpha.marginal(t);
        return v * v;
    };
    return {convolve_separable(f, once, domain, ConvolutionMethod::direct).values,
            convolve_separable(f, twice, domain, ConvolutionMethod::direct).values};
}

MixingMoments moments(const FiniteMixture& mixing, const TensorGrid& domain)
{
    MixingMoments out{Array::Zero(domain.size()), Array::Zero(domain.size())};
    const double scale = std::pow(static_cast<double>(mixing.k()), mixing.dim());
    for (Eigen::Index node = 0; node < domain.size(); ++node) {
        const Point x = domain.node(node);
        for (Eigen::Index i = 0; i < mixing.n(); ++i) {
            const Point m = mixing.means().row(i).transpose();
            const double phi = scale * mixing.kernel()(mixing.k() * (x - m));
            out.first[node] += mixing.weights()[i] * phi;
            out.second[node] += mixing.weights()[i] * phi * phi;
        }
    }
    return out;
}

double ratio_integral(const MixingMoments& mm, const TensorGrid& domain, const Array& weight, int power)
{
    if ((mm.first <= 0.0).any()) {
        throw SupportError("bound constant: mixing density vanishes inside the domain");
    }
    const Array denom = power == 1 ? mm.first : mm.first.square();
    return (domain.tensor_weights() * weight * mm.second / denom).sum();
}

} // namespace

ProbeSup compute_A_logratio(const ProductKernel& kernel, int k, const MeanBox& box,
                            const SupportBox& domain, int probes)
{
    if (box.dim != kernel.dim() || domain.dim() != kernel.dim()) {
        throw ValidationError("compute_A_logratio: dimension mismatch");
    }
    if (box.width() == 0.0) {
        return {};
    }
    return refine(
        [&](int level) {
            double total = 0.0;
            for (int a = 0; a < kernel.dim(); ++a) {
                total += axis_log_ratio_sup(kernel.marginal(), k, box.lower, box.upper, domain.lower(a),
                                            domain.upper(a), level);
            }
            return total;
        },
        probes);
}

double compute_gamma(double A)
{
    if (!std::isfinite(A) || A < 0.0) {
        throw ValidationError("compute_gamma: A must be finite and nonnegative");
    }
    return 4.0 * (std::log(3.0) + 0.5 + A);
}

double compute_C_ratio(const MixingApproximant& mixing, const TensorGrid& domain)
{
    return ratio_integral(moments(mixing, domain), domain, Array::Ones(domain.size()), 1);
}

double compute_C_ratio(const FiniteMixture& mixing, const TensorGrid& domain)
{
    return ratio_integral(moments(mixing, domain), domain, Array::Ones(domain.size()), 1);
}

double compute_C_weighted(const MixingApproximant& mixing, const TargetDensity& f, const TensorGrid& domain)
{
    const Array weight = GridFunction::sample(domain, f.evaluator).values;
    return ratio_integral(moments(mixing, domain), domain, weight, 2);
}

double compute_C_weighted(const FiniteMixture& mixing, const TargetDensity& f, const TensorGrid& domain)
{
    const Array weight = GridFunction::sample(domain, f.evaluator).values;
    return ratio_integral(moments(mixing, domain), domain, weight, 2);
}

double hull_kl_rhs(double epsilon, double beta, double C, double n)
{
    return epsilon / beta + C / (n * beta);
}

double mle_kl_rhs(double epsilon, double beta, double gamma, double C_star, double n, double N,
                  double A_box, double B, int p)
{
    const double argument = N * A_box * B * std::exp(1.0);
    if (!(argument > 1.0)) {
        throw ValidationError("mle_kl_rhs: N A B e must exceed 1");
    }
    return epsilon / beta + gamma * gamma * C_star * C_star / n +
           gamma * (2.0 * n * p / N) * std::log(argument);
}

double mle_rate_rhs(double epsilon, double beta, double C1, double C2, double n, double N)
{
    return epsilon / beta + C1 / n + C2 / std::sqrt(N);
}

double concentration_rhs(double epsilon, double beta_lower, double beta_upper, double n, double N,
                         double dudley_integral, double t, double C_universal)
{
    if (!(beta_lower > 0.0) || beta_upper < beta_lower) {
        throw ValidationError("concentration_rhs: need beta_upper >= beta_lower > 0");
    }
    const double ratio = beta_upper / beta_lower;
    const double log_ratio = std::log(ratio);
    return epsilon / beta_lower + 8.0 * ratio * ratio / n * (2.0 + log_ratio) +
           (beta_upper * C_universal / (beta_lower * beta_lower) * dudley_integral + 8.0 * ratio) /
               std::sqrt(N) +
           std::sqrt(t / N) * 4.0 * std::sqrt(2.0) * log_ratio;
}

ProbeSup estimate_B_lipschitz(const ProductKernel& kernel, int k, const MeanBox& box,
                              const SupportBox& domain, int probes)
{
    if (box.dim != kernel.dim() || domain.dim() != kernel.dim()) {
        throw ValidationError("estimate_B_lipschitz: dimension mismatch");
    }
    if (box.width() == 0.0) {
        return {};
    }
    // Moving one coordinate at a time attains the l1 quotient, so the sup is per axis.
    return refine(
        [&](int level) {
            double sup = 0.0;
            for (int a = 0; a < kernel.dim(); ++a) {
                sup = std::max(sup, axis_log_lipschitz_sup(kernel.marginal(), k, box.lower, box.upper,
                                                           domain.lower(a), domain.upper(a), level));
            }
            return sup;
        },
        probes);
}

Matrix empirical_distances(const Dictionary& dictionary, const Samples& xs)
{
    if (xs.rows() == 0) {
        throw ValidationError("empirical_distances: empty sample");
    }
    const Eigen::Index m = dictionary.size();
    Matrix values(xs.rows(), m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index j = 0; j < xs.rows(); ++j) {
            values(j, a) = dictionary.element(a, xs.row(j).transpose());
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(xs.rows()));
    Matrix d = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = a + 1; b < m; ++b) {
            d(a, b) = d(b, a) = (values.col(a) - values.col(b)).norm() * scale;
        }
    }
    return d;
}

namespace {

Eigen::Index greedy_cover(const Matrix& d, double delta)
{
    const Eigen::Index m = d.rows();
    std::vector<bool> covered(static_cast<std::size_t>(m), false);
    Eigen::Index centres = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (covered[i]) {
            continue;
        }
        ++centres;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (d(i, j) <= delta) {
                covered[j] = true;
            }
        }
    }
    return centres;
}

} // namespace

Eigen::Index covering_number(const Dictionary& dictionary, double delta, const Samples& xs)
{
    if (!(delta > 0.0)) {
        throw ValidationError("covering_number: radius must be positive");
    }
    return greedy_cover(empirical_distances(dictionary, xs), delta);
}

CoveringProfile covering_profile(const Dictionary& dictionary, const Samples& xs, double upper, int levels)
{
    if (!(upper > 0.0) || levels < 0) {
        throw ValidationError("covering_profile: need a positive radius and levels >= 0");
    }
    const Matrix d = empirical_distances(dictionary, xs);
    CoveringProfile profile;
    profile.dictionary_size = dictionary.size();
    for (int j = 0; j <= levels; ++j) {
        const double delta = std::ldexp(upper, -j);
        profile.deltas.push_back(delta);
        profile.greedy.push_back(greedy_cover(d, delta));
    }
    profile.covering = profile.greedy;
    for (int j = levels - 1; j >= 0; --j) {
        profile.covering[j] = std::min(profile.covering[j], profile.covering[j + 1]);
    }
    return profile;
}

double dudley_integral(const CoveringProfile& profile)
{
    const std::size_t levels = profile.deltas.size();
    if (levels == 0) {
        return 0.0;
    }
    auto root_log = [](Eigen::Index count) { return std::sqrt(std::log(static_cast<double>(count))); };
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < levels; ++j) {
        total += (profile.deltas[j] - profile.deltas[j + 1]) * root_log(profile.covering[j + 1]);
    }
    // Below the last radius no finer cover is needed than the whole dictionary.
    total += profile.deltas.back() * root_log(std::max(profile.dictionary_size, profile.covering.back()));
    return total;
}

BoundReport make_bound_report(std::string name, double rhs, double measured, double n, double N,
                              double epsilon, int k)
{
    BoundReport r;
    r.bound_name = std::move(name);
    r.rhs = rhs;
    r.measured = measured;
    r.dominated = measured <= rhs * (1.0 + 1e-6);
    r.n = n;
    r.N = N;
    r.epsilon = epsilon;
    r.k = k;
    return r;
}

} // namespace mixapprox
