#include "mixapprox/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "mixapprox/divergences.hpp"
#include "mixapprox/numeric.hpp"

namespace mixapprox {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vector& terms)
{
    const double top = terms.maxCoeff();
    if (top == kNegInf) {
        return kNegInf;
    }
    return top + std::log((terms.array() - top).exp().sum());
}

/// log of k^p g(k x - k m) for one component.
double log_component(const ProductKernel& kernel, double log_scale, int k, const Point& x,
                     const Eigen::Ref<const Eigen::RowVectorXd>& mean)
{
    double value = log_scale;
    const auto& g = kernel.marginal();
    for (int a = 0; a < kernel.dim(); ++a) {
        value += g.log_evaluator(k * (x[a] - mean[a]));
    }
    return value;
}

void validate_params(const MixtureParams& params, int dim)
{
    if (params.n() == 0 || params.means.rows() != params.n() || params.means.cols() != dim) {
        throw ValidationError("mixture: need one mean of the kernel's dimension per weight");
    }
    if (params.k < 1) {
        throw ValidationError("mixture: scale k must be a positive integer");
    }
    if ((params.weights.array() < 0.0).any() || std::abs(params.weights.sum() - 1.0) > 1e-12) {
        throw ValidationError("mixture: weights must lie on the simplex");
    }
}

/// Log-density of every sample under every component, plus per-sample log mixture density.
struct EStep {
    Matrix resp;        // n x N responsibilities
    Vector log_density; // N
    double log_likelihood = 0.0;
};

EStep expectation(const MixtureParams& params, const ProductKernel& kernel, const Samples& xs)
{
    const Eigen::Index n = params.n();
    const Eigen::Index count = xs.rows();
    const double k = params.k;
    const double log_scale = kernel.dim() * std::log(k);
    const bool gaussian = kernel.name() == "gaussian";
    const double log_norm = gaussian ? numeric::kLogSqrt2Pi : std::log(2.0);

    // Component log densities, one row per component; only the two full-support kernels get here.
    Matrix terms(n, count);
    for (Eigen::Index i = 0; i < n; ++i) {
        Array acc = Array::Constant(count, std::log(params.weights[i]) + log_scale);
        for (int a = 0; a < kernel.dim(); ++a) {
            const Array z = k * (xs.col(a).array() - params.means(i, a));
            if (gaussian) {
                acc -= 0.5 * z.square() + log_norm;
            } else {
                acc -= z.abs() + log_norm;
            }
        }
        terms.row(i) = acc.matrix().transpose();
    }
    const Eigen::RowVectorXd top = terms.colwise().maxCoeff();
    EStep step;
    step.resp = (terms.rowwise() - top).array().exp().matrix();
    const Eigen::RowVectorXd sums = step.resp.colwise().sum();
    step.log_density = (top.array() + sums.array().log()).matrix().transpose();
    step.resp.array().rowwise() /= sums.array();
    step.log_likelihood = step.log_density.sum();
    return step;
}

/// Lower weighted median of xs(order, axis) with weights w.
double weighted_median(const Samples& xs, int axis, const std::vector<Eigen::Index>& order,
                       const Eigen::Ref<const Eigen::RowVectorXd>& w, double half)
{
    double cumulative = 0.0;
    for (Eigen::Index j : order) {
        cumulative += w[j];
        if (cumulative >= half) {
            return xs(j, axis);
        }
    }
    return xs(order.back(), axis);
}

Matrix initial_means(const Samples& xs, int n, const MeanBox& box, EmInit init, std::uint64_t seed)
{
    const int p = static_cast<int>(xs.cols());
    Matrix means(n, p);
    if (init == EmInit::quantiles) {
        const Eigen::Index count = xs.rows();
        for (int a = 0; a < p; ++a) {
            std::vector<double> column(xs.col(a).data(), xs.col(a).data() + count);
            std::sort(column.begin(), column.end());
            for (int i = 0; i < n; ++i) {
                const auto at = static_cast<std::size_t>(std::floor((i + 0.5) / n * count));
                means(i, a) = std::clamp(column[std::min<std::size_t>(at, count - 1)], box.lower, box.upper);
            }
        }
    } else {
        Rng rng(seed);
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < p; ++a) {
                means(i, a) = box.lower + box.width() * uniform01(rng);
            }
        }
    }
    return means;
}

void remove_component(MixtureParams& params, std::vector<bool>& reseeded, Eigen::Index i)
{
    const Eigen::Index n = params.n();
    Vector w(n - 1);
    Matrix m(n - 1, params.means.cols());
    for (Eigen::Index src = 0, dst = 0; src < n; ++src) {
        if (src != i) {
            w[dst] = params.weights[src];
            m.row(dst) = params.means.row(src);
            ++dst;
        }
    }
    params.weights = w / w.sum();
    params.means = std::move(m);
    reseeded.erase(reseeded.begin() + i);
}

} // namespace

MeanBox::MeanBox(double lower_, double upper_, int dim_) : lower(lower_), upper(upper_), dim(dim_)
{
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper) {
        throw ValidationError("MeanBox: need finite lower <= upper");
    }
    if (dim < 1 || dim > kMaxDim) {
        throw ValidationError("MeanBox: dimension must be 1, 2 or 3");
    }
}

bool MeanBox::contains(const Point& m, double slack) const
{
    for (int a = 0; a < dim; ++a) {
        if (m[a] < lower - slack || m[a] > upper + slack) {
            return false;
        }
    }
    return true;
}

Point MeanBox::clamp(const Point& m) const
{
    Point out = m;
    for (int a = 0; a < dim; ++a) {
        out[a] = std::clamp(m[a], lower, upper);
    }
    return out;
}

SupportBox MeanBox::as_support() const
{
    return SupportBox::cube(dim, lower, upper);
}

FiniteMixture::FiniteMixture(ProductKernel kernel, MixtureParams params)
    : kernel_(std::move(kernel)), params_(std::move(params)),
      log_scale_(kernel_.dim() * std::log(static_cast<double>(params_.k)))
{
    validate_params(params_, kernel_.dim());
}

double FiniteMixture::operator()(const Point& x) const
{
    const double scale = std::exp(log_scale_);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n(); ++i) {
        if (params_.weights[i] == 0.0) {
            continue;
        }
        const Point m = params_.means.row(i).transpose();
        total += params_.weights[i] * scale * kernel_(params_.k * (x - m));
    }
    return total;
}

double FiniteMixture::log_eval(const Point& x) const
{
    Vector terms(n());
    for (Eigen::Index i = 0; i < n(); ++i) {
        terms[i] = std::log(params_.weights[i]) +
                   log_component(kernel_, log_scale_, params_.k, x, params_.means.row(i));
    }
    return log_sum_exp(terms);
}

Point FiniteMixture::sample(Rng& rng) const
{
    const double u = uniform01(rng);
    double cumulative = 0.0;
    Eigen::Index pick = n() - 1;
    for (Eigen::Index i = 0; i < n(); ++i) {
        cumulative += params_.weights[i];
        if (u < cumulative && params_.weights[i] > 0.0) {
            pick = i;
            break;
        }
    }
    // Rounding can leave the cumulative sum just below 1; fall back to the last live component.
    while (params_.weights[pick] == 0.0 && pick > 0) {
        --pick;
    }
    return params_.means.row(pick).transpose() + kernel_.sample(rng) / params_.k;
}

bool FiniteMixture::within(const MeanBox& box) const
{
    for (Eigen::Index i = 0; i < n(); ++i) {
        if (!box.contains(params_.means.row(i).transpose())) {
            return false;
        }
    }
    return true;
}

GridFunction FiniteMixture::on_grid(const TensorGrid& grid) const
{
    return GridFunction::sample(grid, [this](const Point& x) { return (*this)(x); });
}

Array FiniteMixture::log_on_grid(const TensorGrid& grid) const
{
    Array out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        out[i] = log_eval(grid.node(i));
    }
    return out;
}

double mixture_eval(const FiniteMixture& mix, const Point& x)
{
    return mix(x);
}

Samples mixture_sample(const FiniteMixture& mix, std::uint64_t seed, Eigen::Index count)
{
    if (count < 1) {
        throw ValidationError("mixture_sample: need at least one draw");
    }
    Rng rng(seed);
    Samples xs(count, mix.dim());
    for (Eigen::Index i = 0; i < count; ++i) {
        xs.row(i) = mix.sample(rng).transpose();
    }
    return xs;
}

double log_likelihood(const MixtureParams& params, const ProductKernel& kernel, const Samples& xs)
{
    validate_params(params, kernel.dim());
    if (xs.cols() != kernel.dim()) {
        throw ValidationError("log_likelihood: sample dimension differs from the kernel");
    }
    const double log_scale = kernel.dim() * std::log(static_cast<double>(params.k));
    Vector terms(params.n());
    double total = 0.0;
    for (Eigen::Index j = 0; j < xs.rows(); ++j) {
        const Point x = xs.row(j).transpose();
        for (Eigen::Index i = 0; i < params.n(); ++i) {
            terms[i] = std::log(params.weights[i]) +
                       log_component(kernel, log_scale, params.k, x, params.means.row(i));
        }
        total += log_sum_exp(terms);
    }
    return total;
}

EmResult em_fit(const Samples& xs, int n, int k, const ProductKernel& kernel, const MeanBox& box,
                std::uint64_t init_seed, const EmOptions& options)
{
    const std::string& name = kernel.name();
    const bool gaussian = name == "gaussian";
    if (!gaussian && name != "laplace") {
        throw ValidationError("em_fit: kernel must be gaussian or laplace");
    }
    if (n < 1 || xs.rows() < n) {
        throw ValidationError("em_fit: need 1 <= n <= N");
    }
    if (xs.cols() != kernel.dim() || box.dim != kernel.dim()) {
        throw ValidationError("em_fit: sample, kernel and box dimensions differ");
    }
    if (k < 1) {
        throw ValidationError("em_fit: scale k must be a positive integer");
    }
    const int p = kernel.dim();
    const Eigen::Index count = xs.rows();

    EmResult result;
    MixtureParams& params = result.params;
    params.k = k;
    params.weights = Vector::Constant(n, 1.0 / n);
    params.means = initial_means(xs, n, box, options.init, init_seed);
    std::vector<bool> reseeded(static_cast<std::size_t>(n), false);

    std::vector<std::vector<Eigen::Index>> order;
    if (!gaussian) {
        for (int a = 0; a < p; ++a) {
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(),
                             [&xs, a](Eigen::Index l, Eigen::Index r) { return xs(l, a) < xs(r, a); });
            order.push_back(std::move(idx));
        }
    }

    EStep step = expectation(params, kernel, xs);
    result.trace.push_back(step.log_likelihood);
    for (int it = 1; it <= options.max_iters; ++it) {
        const Vector mass = step.resp.rowwise().sum();
        params.weights = mass / static_cast<double>(count);
        for (Eigen::Index i = 0; i < params.n(); ++i) {
            if (!(mass[i] > 0.0)) {
                continue;
            }
            for (int a = 0; a < p; ++a) {
                double m = 0.0;
                if (gaussian) {
                    m = step.resp.row(i).dot(xs.col(a)) / mass[i];
                } else {
                    m = weighted_median(xs, a, order[a], step.resp.row(i), 0.5 * mass[i]);
                }
                params.means(i, a) = std::clamp(m, box.lower, box.upper);
            }
        }
        params.weights /= params.weights.sum();

        for (Eigen::Index i = params.n() - 1; i >= 0; --i) {
            if (params.weights[i] >= 1e-12) {
                continue;
            }
            if (!reseeded[i]) {
                Eigen::Index worst = 0;
                step.log_density.minCoeff(&worst);
                params.means.row(i) = box.clamp(xs.row(worst).transpose()).transpose();
                reseeded[i] = true;
                result.warnings.push_back("component " + std::to_string(i) + " re-seeded at iteration " +
                                          std::to_string(it));
            } else if (params.n() > 1) {
                remove_component(params, reseeded, i);
                result.warnings.push_back("component " + std::to_string(i) + " dropped at iteration " +
                                          std::to_string(it));
            }
        }

        const double previous = result.trace.back();
        step = expectation(params, kernel, xs);
        result.trace.push_back(step.log_likelihood);
        result.iterations = it;
        if (step.log_likelihood - previous < options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

MleResult mle_fit(const Samples& xs, int n, const std::vector<int>& k_grid, const ProductKernel& kernel,
                  const MeanBox& box, int restarts, std::uint64_t seed, const EmOptions& options)
{
    if (k_grid.empty()) {
        throw ValidationError("mle_fit: k_grid is empty");
    }
    if (restarts < 1) {
        throw ValidationError("mle_fit: need at least one restart");
    }
    MleResult out;
    bool have = false;
    for (int k : k_grid) {
        double best_here = kNegInf;
        for (int r = 0; r < restarts; ++r) {
            EmOptions opt = options;
            opt.init = r == 0 ? EmInit::quantiles : EmInit::uniform;
            EmResult fit = em_fit(xs, n, k, kernel, box, r == 0 ? seed : derive_seed(seed, r), opt);
            const double ll = fit.log_likelihood();
            best_here = std::max(best_here, ll);
            if (!have || ll > out.best.log_likelihood()) {
                out.best = std::move(fit);
                out.k = k;
                out.restart = r;
                have = true;
            }
        }
        out.per_k.push_back(best_here);
    }
    return out;
}

Dictionary::Dictionary(ProductKernel kernel, int k, std::vector<Vector> axis_means)
    : kernel_(std::move(kernel)), k_(k), axis_means_(std::move(axis_means)), size_(1)
{
    if (static_cast<int>(axis_means_.size()) != kernel_.dim()) {
        throw ValidationError("Dictionary: one mean lattice per axis required");
    }
    if (k < 1) {
        throw ValidationError("Dictionary: scale k must be a positive integer");
    }
    for (const Vector& axis : axis_means_) {
        size_ *= axis.size();
    }
    if (size_ == 0) {
        throw ValidationError("Dictionary: empty dictionary");
    }
    if (size_ > 10000) {
        throw ValidationError("Dictionary: more than 1e4 elements");
    }
}

Dictionary Dictionary::lattice(const ProductKernel& kernel, int k, const MeanBox& box, int points_per_axis)
{
    if (points_per_axis < 1) {
        throw ValidationError("Dictionary: need at least one mean per axis");
    }
    Vector axis(points_per_axis);
    if (points_per_axis == 1) {
        axis[0] = 0.5 * (box.lower + box.upper);
    } else {
        axis = Vector::LinSpaced(points_per_axis, box.lower, box.upper);
    }
    return Dictionary(kernel, k, std::vector<Vector>(static_cast<std::size_t>(kernel.dim()), axis));
}

Point Dictionary::mean(Eigen::Index flat) const
{
    Point m(dim());
    for (int a = 0; a < dim(); ++a) {
        const Eigen::Index n = axis_means_[a].size();
        m[a] = axis_means_[a][flat % n];
        flat /= n;
    }
    return m;
}

double Dictionary::element(Eigen::Index flat, const Point& x) const
{
    return std::pow(static_cast<double>(k_), dim()) * kernel_(k_ * (x - mean(flat)));
}

GreedyObjective parse_objective(std::string_view name)
{
    if (name == "l2") {
        return GreedyObjective::l2;
    }
    if (name == "kl") {
        return GreedyObjective::kl;
    }
    throw ValidationError("unknown greedy objective '" + std::string(name) + "'");
}

namespace {

/// Per-axis evaluation of dictionary elements on the target grid: D_a(i, x) = k g(k(x - mu_i)).
struct GreedyTables {
    std::vector<Matrix> rows;
    std::vector<int> dict_counts;
};

GreedyTables greedy_tables(const Dictionary& dict, const TensorGrid& grid)
{
    GreedyTables t;
    const auto& g = dict.kernel().marginal();
    const double k = dict.k();
    for (int a = 0; a < grid.dim(); ++a) {
        const Vector& mu = dict.axis_means(a);
        const Vector& x = grid.nodes(a);
        Matrix d(mu.size(), x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            for (Eigen::Index i = 0; i < mu.size(); ++i) {
                d(i, j) = k * g(k * (x[j] - mu[i]));
            }
        }
        t.rows.push_back(std::move(d));
        t.dict_counts.push_back(static_cast<int>(mu.size()));
    }
    return t;
}

std::array<int, kMaxDim> unravel_counts(Eigen::Index flat, const std::vector<int>& counts)
{
    std::array<int, kMaxDim> idx{};
    for (std::size_t a = 0; a < counts.size(); ++a) {
        idx[a] = static_cast<int>(flat % counts[a]);
        flat /= counts[a];
    }
    return idx;
}

/// Grid values of dictionary element `flat`.
Array element_column(const GreedyTables& t, const TensorGrid& grid, Eigen::Index flat)
{
    const auto m = unravel_counts(flat, t.dict_counts);
    Array col(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unravel(i);
        double v = 1.0;
        for (int a = 0; a < grid.dim(); ++a) {
            v *= t.rows[a](m[a], idx[a]);
        }
        col[i] = v;
    }
    return col;
}

/// Separable products over axes: out[flat] = prod_a factors[a][idx_a(flat)].
Vector separable_product(const std::vector<Vector>& factors, const std::vector<int>& counts)
{
    Eigen::Index size = 1;
    for (int c : counts) {
        size *= c;
    }
    Vector out(size);
    for (Eigen::Index flat = 0; flat < size; ++flat) {
        const auto idx = unravel_counts(flat, counts);
        double v = 1.0;
        for (std::size_t a = 0; a < factors.size(); ++a) {
            v *= factors[a][idx[a]];
        }
        out[flat] = v;
    }
    return out;
}

double kl_on_grid(const Array& w, const Array& t, const Array& log_t, const Array& f)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t[i] > 0.0) {
            total += w[i] * t[i] * (log_t[i] - std::log(std::max(f[i], 1e-300)));
        }
    }
    return total;
}

} // namespace

GreedyResult greedy_fit(const GridFunction& target, const Dictionary& dictionary, int n_max,
                        GreedyObjective objective)
{
    const TensorGrid& grid = target.grid;
    if (grid.dim() != dictionary.dim()) {
        throw ValidationError("greedy_fit: target and dictionary dimensions differ");
    }
    if (n_max < 1) {
        throw ValidationError("greedy_fit: n_max must be positive");
    }
    if (objective == GreedyObjective::kl && dictionary.kernel().marginal().compact()) {
        throw ValidationError("greedy_fit: the kl objective needs a full-support kernel");
    }
    const int p = grid.dim();
    const Array& w = grid.tensor_weights();
    const Array& t = target.values;
    const GreedyTables tables = greedy_tables(dictionary, grid);
    const Eigen::Index size = dictionary.size();

    // <phi_m, t> for every m, and the separable norms/Gram factors.
    const Vector t_phi = apply_separable(w * t, grid.counts(), tables.rows).matrix();
    std::vector<Vector> sq_factors;
    std::vector<Matrix> gram;
    for (int a = 0; a < p; ++a) {
        const Matrix& d = tables.rows[a];
        const Vector& wa = grid.weights(a);
        sq_factors.push_back(d.array().square().matrix() * wa);
        gram.push_back(d * wa.asDiagonal() * d.transpose());
    }
    const Vector phi_sq = separable_product(sq_factors, tables.dict_counts);
    auto cross = [&](Eigen::Index star) {
        const auto s = unravel_counts(star, tables.dict_counts);
        std::vector<Vector> cols;
        for (int a = 0; a < p; ++a) {
            cols.push_back(gram[a].col(s[a]));
        }
        return separable_product(cols, tables.dict_counts);
    };

    const Array log_t = (t > 0.0).select(t.log(), 0.0);
    const double t_mass = (w * t).sum();
    auto objective_of = [&](const Array& f) {
        return objective == GreedyObjective::l2 ? (w * (t - f).square()).sum() : kl_on_grid(w, t, log_t, f);
    };

    GreedyResult result;
    Array f;
    Vector weights;
    Matrix means(0, p);
    double ff = 0.0, ft = 0.0;
    Vector f_phi;

    for (int n = 1; n <= n_max; ++n) {
        Eigen::Index star = 0;
        double lambda = 1.0;
        if (n == 1) {
            if (objective == GreedyObjective::l2) {
                (phi_sq - 2.0 * t_phi).minCoeff(&star);
            } else {
                // Maximise <t, log phi_m>, separable across axes.
                Vector score = Vector::Zero(size);
                for (int a = 0; a < p; ++a) {
                    Array marginal = Array::Zero(grid.count(a));
                    for (Eigen::Index i = 0; i < grid.size(); ++i) {
                        marginal[grid.unravel(i)[a]] += w[i] * t[i];
                    }
                    const Matrix log_rows = tables.rows[a].array().max(1e-300).log().matrix();
                    const Vector per_axis = log_rows * marginal.matrix();
                    for (Eigen::Index m = 0; m < size; ++m) {
                        score[m] += per_axis[unravel_counts(m, tables.dict_counts)[a]];
                    }
                }
                score.maxCoeff(&star);
            }
        } else if (objective == GreedyObjective::l2) {
            const double gap = ff - 2.0 * ft + t.square().matrix().dot(w.matrix());
            double best_gain = -1.0;
            double best_a = 0.0, best_b = 0.0;
            for (Eigen::Index m = 0; m < size; ++m) {
                const double a = t_phi[m] - ft - f_phi[m] + ff;
                const double b = phi_sq[m] - 2.0 * f_phi[m] + ff;
                const double l = b > 0.0 ? std::clamp(a / b, 0.0, 1.0) : 0.0;
                const double gain = 2.0 * l * a - l * l * b;
                if (gain > best_gain) {
                    best_gain = gain;
                    star = m;
                    best_a = a;
                    best_b = b;
                }
            }
            auto q = [gap, best_a, best_b](double l) { return gap - 2.0 * l * best_a + l * l * best_b; };
            lambda = numeric::golden_section_minimize(q, 0.0, 1.0, 1e-10);
            for (double edge : {0.0, 1.0}) {
                if (q(edge) < q(lambda)) {
                    lambda = edge;
                }
            }
        } else {
            const Array u = t / f.max(1e-300);
            const Vector phi_u = apply_separable(w * u, grid.counts(), tables.rows).matrix();
            const Vector slope = Vector::Constant(size, t_mass) - phi_u;
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(size));
            std::iota(idx.begin(), idx.end(), 0);
            const std::size_t keep = std::min<std::size_t>(8, idx.size());
            std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                              [&slope](Eigen::Index l, Eigen::Index r) {
                                  return slope[l] < slope[r] || (slope[l] == slope[r] && l < r);
                              });
            double best = objective_of(f);
            lambda = 0.0;
            star = idx.front();
            for (std::size_t c = 0; c < keep; ++c) {
                const Array col = element_column(tables, grid, idx[c]);
                auto kl = [&](double l) { return kl_on_grid(w, t, log_t, (1.0 - l) * f + l * col); };
                double l = numeric::golden_section_minimize(kl, 0.0, 1.0, 1e-10);
                if (kl(1.0) < kl(l)) {
                    l = 1.0;
                }
                const double value = kl(l);
                if (value < best) {
                    best = value;
                    lambda = l;
                    star = idx[c];
                }
            }
        }

        const Array col = element_column(tables, grid, star);
        const Vector star_cross = cross(star);
        if (n == 1) {
            f = col;
            weights = Vector::Ones(1);
            ff = phi_sq[star];
            ft = t_phi[star];
            f_phi = star_cross;
        } else {
            f = (1.0 - lambda) * f + lambda * col;
            ff = (1.0 - lambda) * (1.0 - lambda) * ff + 2.0 * lambda * (1.0 - lambda) * f_phi[star] +
                 lambda * lambda * phi_sq[star];
            ft = (1.0 - lambda) * ft + lambda * t_phi[star];
            f_phi = (1.0 - lambda) * f_phi + lambda * star_cross;
            weights *= (1.0 - lambda);
            weights.conservativeResize(n);
            weights[n - 1] = lambda;
        }
        means.conservativeResize(n, p);
        means.row(n - 1) = dictionary.mean(star).transpose();

        MixtureParams params;
        params.weights = weights / weights.sum();
        params.means = means;
        params.k = dictionary.k();
        result.iterates.emplace_back(dictionary.kernel(), std::move(params));
        result.objective.push_back(objective_of(f));
    }
    return result;
}

MixingApproximant make_mixing_approximant(const TargetDensity& target, const ProductKernel& kernel, int k,
                                          const TensorGrid& out_grid)
{
    if (kernel.dim() != target.dim) {
        throw ValidationError("mixing approximant: kernel and target dimensions differ");
    }
    const GridFunction f = GridFunction::sample(default_grid(target), target.evaluator);
    return MixingApproximant{target, kernel, k, convolve(f, Dilation(kernel, k), out_grid)};
}

} // namespace mixapprox
