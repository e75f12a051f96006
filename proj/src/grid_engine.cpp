#include "mixapprox/grid_engine.hpp"

#include <cmath>
#include <complex>
#include <utility>

#include <unsupported/Eigen/FFT>

#include "mixapprox/divergences.hpp"

namespace mixapprox {

namespace {

/// Node offset of `out` relative to `in` on one axis, if both sit on one lattice.
bool lattice_offset(const TensorGrid& in, const TensorGrid& out, int axis, long& offset)
{
    const double h = in.spacing(axis);
    if (std::abs(out.spacing(axis) - h) > 1e-9 * h) {
        return false;
    }
    const double shift = (out.box().lower(axis) - in.box().lower(axis)) / h;
    offset = std::lround(shift);
    return std::abs(shift - static_cast<double>(offset)) <= 1e-6;
}

bool on_common_lattice(const TensorGrid& in, const TensorGrid& out, std::vector<long>& offsets)
{
    offsets.assign(static_cast<std::size_t>(in.dim()), 0);
    for (int axis = 0; axis < in.dim(); ++axis) {
        if (!lattice_offset(in, out, axis, offsets[axis])) {
            return false;
        }
    }
    return true;
}

/// Runs `fn(line_in, line_out)` over every 1-D fibre along `axis`.
template <typename Fn>
Array map_fibres(const Array& values, const std::vector<int>& counts, int axis, int out_count, Fn fn)
{
    Eigen::Index pre = 1, post = 1;
    for (int b = 0; b < axis; ++b) {
        pre *= counts[b];
    }
    for (std::size_t b = axis + 1; b < counts.size(); ++b) {
        post *= counts[b];
    }
    const Eigen::Index n = counts[axis];
    Array out(pre * out_count * post);
    Vector line(n), result(out_count);
    for (Eigen::Index s = 0; s < post; ++s) {
        for (Eigen::Index i = 0; i < pre; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                line[j] = values[i + pre * (j + n * s)];
            }
            fn(line, result);
            for (Eigen::Index o = 0; o < out_count; ++o) {
                out[i + pre * (o + out_count * s)] = result[o];
            }
        }
    }
    return out;
}

/// Linear convolution of every fibre with a fixed kernel sequence via zero-padded FFT.
/// Output o gathers sum_j line[j] * seq[o + n - 1 - j], plus the end-node corrections
/// line[0] * first_fix[o] + line[n - 1] * last_fix[o].
Array fft_axis(const Array& values, const std::vector<int>& counts, int axis, int out_count,
               const Vector& seq, const Vector& first_fix, const Vector& last_fix)
{
    const Eigen::Index n = counts[axis];
    Eigen::Index size = 1;
    while (size < n + seq.size() - 1) {
        size *= 2;
    }
    Eigen::FFT<double> fft;
    std::vector<double> padded(static_cast<std::size_t>(size), 0.0);
    for (Eigen::Index t = 0; t < seq.size(); ++t) {
        padded[t] = seq[t];
    }
    std::vector<std::complex<double>> kernel_hat, line_hat;
    fft.fwd(kernel_hat, padded);

    return map_fibres(values, counts, axis, out_count, [&](const Vector& line, Vector& result) {
        std::fill(padded.begin(), padded.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            padded[j] = line[j];
        }
        fft.fwd(line_hat, padded);
        for (std::size_t i = 0; i < line_hat.size(); ++i) {
            line_hat[i] *= kernel_hat[i];
        }
        std::vector<double> back;
        fft.inv(back, line_hat);
        for (Eigen::Index o = 0; o < out_count; ++o) {
            result[o] = back[o + n - 1] + line[0] * first_fix[o] + line[n - 1] * last_fix[o];
        }
    });
}

void check_bandwidth(const TensorGrid& grid, int k, const char* which)
{
    for (int axis = 0; axis < grid.dim(); ++axis) {
        if (grid.spacing(axis) > 0.25 / k * (1.0 + 1e-12)) {
            throw ValidationError(std::string("convolve: ") + which +
                                  " grid has fewer than 4 nodes per 1/k");
        }
    }
}

/// An end node belongs to one quadrature cell, so a kernel jump that lands on it takes the
/// limit from inside that cell instead of the midpoint value used at interior nodes.
double end_node_kernel(const std::function<double(double)>& axis_kernel, double t, bool first, double h)
{
    const double inward = 1e-6 * h;
    return axis_kernel(first ? t - inward : t + inward);
}

} // namespace

double quadrature_integrate(const GridFunction& h)
{
    if (!h.values.allFinite()) {
        throw ValidationError("quadrature_integrate: non-finite values");
    }
    return (h.values * h.grid.tensor_weights()).sum();
}

Array apply_separable(const Array& values, const std::vector<int>& counts,
                      const std::vector<Matrix>& ops)
{
    std::vector<int> shape = counts;
    Array current = values;
    for (std::size_t axis = 0; axis < ops.size(); ++axis) {
        const Matrix& op = ops[axis];
        if (op.cols() != shape[axis]) {
            throw ValidationError("apply_separable: operator does not match the axis length");
        }
        Eigen::Index pre = 1, post = 1;
        for (std::size_t b = 0; b < axis; ++b) {
            pre *= shape[b];
        }
        for (std::size_t b = axis + 1; b < shape.size(); ++b) {
            post *= shape[b];
        }
        const Eigen::Index n = shape[axis];
        const Eigen::Index m = op.rows();
        Array next(pre * m * post);
        if (pre == 1) {
            Eigen::Map<const Matrix> x(current.data(), n, post);
            Eigen::Map<Matrix>(next.data(), m, post).noalias() = op * x;
        } else {
            for (Eigen::Index s = 0; s < post; ++s) {
                Eigen::Map<const Matrix> x(current.data() + s * pre * n, pre, n);
                Eigen::Map<Matrix>(next.data() + s * pre * m, pre, m).noalias() = x * op.transpose();
            }
        }
        shape[axis] = static_cast<int>(m);
        current = std::move(next);
    }
    return current;
}

TensorGrid default_output_grid(const TensorGrid& input, const Dilation& alpha, double tolerance)
{
    const double r = alpha.radius(tolerance);
    std::vector<int> pad(static_cast<std::size_t>(input.dim()));
    for (int axis = 0; axis < input.dim(); ++axis) {
        int nodes = static_cast<int>(std::ceil(r / input.spacing(axis) - 1e-9));
        pad[axis] = nodes + (nodes % 2);
    }
    return widen(input, pad);
}

GridFunction convolve_separable(const GridFunction& f, const std::function<double(double)>& axis_kernel,
                                const TensorGrid& out_grid, ConvolutionMethod method)
{
    const TensorGrid& in = f.grid;
    if (out_grid.dim() != in.dim()) {
        throw ValidationError("convolve: output grid dimension differs from the input");
    }
    if (!f.values.allFinite()) {
        throw ValidationError("convolve: non-finite input values");
    }
    std::vector<long> offsets;
    const bool aligned = on_common_lattice(in, out_grid, offsets);
    if (method == ConvolutionMethod::fft && !aligned) {
        throw ValidationError("convolve: fft path needs the output on the input lattice");
    }
    if (method == ConvolutionMethod::automatic) {
        double work = 0.0;
        for (int axis = 0; axis < in.dim(); ++axis) {
            work = std::max(work, static_cast<double>(in.count(axis)) * out_grid.count(axis));
        }
        method = (aligned && work > 4e6) ? ConvolutionMethod::fft : ConvolutionMethod::direct;
    }

    Array out;
    if (method == ConvolutionMethod::direct) {
        std::vector<Matrix> ops;
        for (int axis = 0; axis < in.dim(); ++axis) {
            const Vector& x = in.nodes(axis);
            const Vector& w = in.weights(axis);
            const Vector& y = out_grid.nodes(axis);
            Matrix op(y.size(), x.size());
            const Eigen::Index last = x.size() - 1;
            const double h = in.spacing(axis);
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                for (Eigen::Index o = 0; o < y.size(); ++o) {
                    const double t = y[o] - x[j];
                    op(o, j) = w[j] * ((j == 0 || j == last) ? end_node_kernel(axis_kernel, t, j == 0, h)
                                                             : axis_kernel(t));
                }
            }
            ops.push_back(std::move(op));
        }
        out = apply_separable(f.values, in.counts(), ops);
    } else {
        std::vector<int> shape = in.counts();
        out = f.values;
        for (int axis = 0; axis < in.dim(); ++axis) {
            const Vector& w = in.weights(axis);
            const int n = in.count(axis);
            const int m = out_grid.count(axis);
            const double h = in.spacing(axis);
            // Weight the axis, then convolve with kernel samples at lattice lags.
            out = map_fibres(out, shape, axis, n, [&w](const Vector& line, Vector& result) {
                result = line.cwiseProduct(w);
            });
            const long lag0 = offsets[axis] - (n - 1);
            Vector seq(m + n - 1);
            for (Eigen::Index t = 0; t < seq.size(); ++t) {
                seq[t] = axis_kernel(static_cast<double>(lag0 + t) * h);
            }
            const Vector& y = out_grid.nodes(axis);
            const Vector& x = in.nodes(axis);
            Vector first_fix(m), last_fix(m);
            for (int o = 0; o < m; ++o) {
                first_fix[o] = end_node_kernel(axis_kernel, y[o] - x[0], true, h) - seq[o + n - 1];
                last_fix[o] = end_node_kernel(axis_kernel, y[o] - x[n - 1], false, h) - seq[o];
            }
            out = fft_axis(out, shape, axis, m, seq, first_fix, last_fix);
            shape[axis] = m;
        }
        // Round-off leaves values of order 1e-16 below zero in the far tails.
        out = out.max(0.0);
    }
    return GridFunction(out_grid, std::move(out));
}

GridFunction convolve(const GridFunction& f, const Dilation& alpha, const TensorGrid& out_grid,
                      ConvolutionMethod method)
{
    if (alpha.dim() != f.grid.dim()) {
        throw ValidationError("convolve: kernel and density dimensions differ");
    }
    check_bandwidth(f.grid, alpha.k(), "input");
    check_bandwidth(out_grid, alpha.k(), "output");
    return convolve_separable(
        f, [&alpha](double t) { return alpha.marginal(t); }, out_grid, method);
}

GridFunction convolve(const GridFunction& f, const Dilation& alpha, ConvolutionMethod method)
{
    return convolve(f, alpha, default_output_grid(f.grid, alpha), method);
}

GridFunction convolve_sampled(const GridFunction& f, const GridFunction& g)
{
    const int p = f.grid.dim();
    if (g.grid.dim() != p) {
        throw ValidationError("convolve_sampled: dimension mismatch");
    }
    Vector lo(p), hi(p);
    std::vector<int> counts(static_cast<std::size_t>(p));
    double cell = 1.0;
    for (int axis = 0; axis < p; ++axis) {
        const double h = f.grid.spacing(axis);
        if (std::abs(g.grid.spacing(axis) - h) > 1e-9 * h) {
            throw ValidationError("convolve_sampled: grids must share their spacing");
        }
        counts[axis] = f.grid.count(axis) + g.grid.count(axis) - 1;
        lo[axis] = f.grid.box().lower(axis) + g.grid.box().lower(axis);
        hi[axis] = lo[axis] + (counts[axis] - 1) * h;
        cell *= h;
    }
    const TensorGrid out_grid(SupportBox(lo, hi), counts, QuadratureRule::trapezoid);
    const Array a = f.values * f.grid.tensor_weights();
    const Array b = g.values * g.grid.tensor_weights();
    Array out = Array::Zero(out_grid.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            continue;
        }
        const auto ia = f.grid.unravel(i);
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const auto jb = g.grid.unravel(j);
            Eigen::Index flat = 0, stride = 1;
            for (int axis = 0; axis < p; ++axis) {
                flat += (ia[axis] + jb[axis]) * stride;
                stride *= counts[axis];
            }
            out[flat] += a[i] * b[j];
        }
    }
    return GridFunction(out_grid, out / cell);
}

YoungCheck young_inequality_check(const GridFunction& f, const GridFunction& g, double q, double r)
{
    if (!(q >= 1.0) || !(r >= 1.0)) {
        throw ValidationError("young_inequality_check: orders must be at least 1");
    }
    if (f.grid.rule() != QuadratureRule::trapezoid || g.grid.rule() != QuadratureRule::trapezoid) {
        // The discrete inequality needs every node weight to be at most the cell volume.
        throw ValidationError("young_inequality_check: trapezoid grids required");
    }
    YoungCheck check;
    check.q = q;
    check.r = r;
    check.case_one = q == 1.0;
    if (!check.case_one && std::abs(1.0 / q + 1.0 / r - 1.0) > 1e-12) {
        throw ValidationError("young_inequality_check: orders are not conjugate");
    }
    const GridFunction fg = convolve_sampled(f, g);
    if (check.case_one) {
        check.lhs = lq_norm(fg, r);
        check.rhs = lq_norm(f, 1.0) * lq_norm(g, r);
    } else {
        check.lhs = lq_norm(fg, kInfinity);
        check.rhs = lq_norm(f, q) * lq_norm(g, r);
    }
    check.passed = check.lhs <= check.rhs * (1.0 + 1e-6);
    return check;
}

GridFunction zero_extend(const TargetDensity& f, const SupportBox& widened,
                         const TensorGrid& support_grid)
{
    const int p = f.dim;
    if (support_grid.dim() != p || !support_grid.box().approx_equal(f.support)) {
        throw ValidationError("zero_extend: grid must span the target's support");
    }
    if (!widened.contains(f.support, 1e-12)) {
        throw ValidationError("zero_extend: widened box does not contain the support");
    }
    const bool simpson = support_grid.rule() == QuadratureRule::simpson;
    std::vector<int> pad_lo(p), pad_hi(p), counts(p);
    Vector lo(p), hi(p);
    for (int axis = 0; axis < p; ++axis) {
        const double h = support_grid.spacing(axis);
        auto nodes_for = [h, simpson](double gap) {
            int n = static_cast<int>(std::ceil(gap / h - 1e-9));
            return simpson ? n + (n % 2) : n;
        };
        pad_lo[axis] = nodes_for(f.support.lower(axis) - widened.lower(axis));
        pad_hi[axis] = nodes_for(widened.upper(axis) - f.support.upper(axis));
        counts[axis] = support_grid.count(axis) + pad_lo[axis] + pad_hi[axis];
        lo[axis] = f.support.lower(axis) - pad_lo[axis] * h;
        hi[axis] = f.support.upper(axis) + pad_hi[axis] * h;
    }
    const TensorGrid grid(SupportBox(lo, hi), counts, support_grid.rule());
    Array values = Array::Zero(grid.size());
    for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
        const auto idx = grid.unravel(flat);
        Point x(p);
        double factor = 1.0;
        bool inside = true;
        for (int axis = 0; axis < p && inside; ++axis) {
            const int i = idx[axis] - pad_lo[axis];
            const int n = support_grid.count(axis);
            inside = i >= 0 && i < n;
            if (inside) {
                x[axis] = support_grid.nodes(axis)[i];
                if ((i == 0 && pad_lo[axis] > 0) || (i == n - 1 && pad_hi[axis] > 0)) {
                    factor *= 0.5;
                }
            }
        }
        if (inside) {
            values[flat] = factor * f(x);
        }
    }
    return GridFunction(grid, std::move(values));
}

GridFunction zero_extend(const TargetDensity& f, const SupportBox& widened)
{
    return zero_extend(f, widened, default_grid(f));
}

GridFunction restrict_to(const GridFunction& h, const SupportBox& box)
{
    const TensorGrid& grid = h.grid;
    const int p = grid.dim();
    if (box.dim() != p || !grid.box().contains(box, 1e-9)) {
        throw ValidationError("restrict_to: box is not inside the grid");
    }
    std::vector<int> first(p), counts(p);
    for (int axis = 0; axis < p; ++axis) {
        const double step = grid.spacing(axis);
        const double a = (box.lower(axis) - grid.box().lower(axis)) / step;
        const double b = (box.upper(axis) - grid.box().lower(axis)) / step;
        const long ia = std::lround(a), ib = std::lround(b);
        if (std::abs(a - ia) > 1e-6 || std::abs(b - ib) > 1e-6) {
            throw ValidationError("restrict_to: box edges are not grid nodes");
        }
        first[axis] = static_cast<int>(ia);
        counts[axis] = static_cast<int>(ib - ia + 1);
    }
    const TensorGrid sub(box, counts, grid.rule());
    Array values(sub.size());
    for (Eigen::Index flat = 0; flat < sub.size(); ++flat) {
        const auto idx = sub.unravel(flat);
        Eigen::Index source = 0, stride = 1;
        for (int axis = 0; axis < p; ++axis) {
            source += (idx[axis] + first[axis]) * stride;
            stride *= grid.count(axis);
        }
        values[flat] = h.values[source];
    }
    return GridFunction(sub, std::move(values));
}

} // namespace mixapprox
