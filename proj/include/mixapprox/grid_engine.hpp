#pragma once

#include <functional>
#include <vector>

#include "mixapprox/common.hpp"
#include "mixapprox/density_zoo.hpp"
#include "mixapprox/grid.hpp"
#include "mixapprox/kernel_family.hpp"

namespace mixapprox {

/// Tensor-product quadrature of the sampled values.
double quadrature_integrate(const GridFunction& h);

/// Applies one dense operator per axis to a tensor of values laid out axis-0 fastest.
/// ops[a] maps counts[a] inputs to ops[a].rows() outputs.
Array apply_separable(const Array& values, const std::vector<int>& counts,
                      const std::vector<Matrix>& ops);

enum class ConvolutionMethod { automatic, direct, fft };

/// Truncation tolerance for alpha_k when choosing output grids.
inline constexpr double kTruncationTolerance = 1e-9;

/// Input grid widened on every axis by the kernel's truncation radius. The pad is
/// rounded up to an even node count, so Simpson panels keep their alignment.
TensorGrid default_output_grid(const TensorGrid& input, const Dilation& alpha,
                               double tolerance = kTruncationTolerance);

/// Quadrature of int a(y - m) f(m) dm at out_grid nodes, where a(x) = prod_i axis_kernel(x_i).
/// The fft path needs out_grid on the input lattice; `automatic` picks it for large sweeps.
GridFunction convolve_separable(const GridFunction& f, const std::function<double(double)>& axis_kernel,
                                const TensorGrid& out_grid,
                                ConvolutionMethod method = ConvolutionMethod::automatic);

/// f * alpha_k on out_grid. Requires at least 4 nodes per 1/k on both grids.
GridFunction convolve(const GridFunction& f, const Dilation& alpha, const TensorGrid& out_grid,
                      ConvolutionMethod method = ConvolutionMethod::automatic);

/// f * alpha_k on default_output_grid(f.grid, alpha).
GridFunction convolve(const GridFunction& f, const Dilation& alpha,
                      ConvolutionMethod method = ConvolutionMethod::automatic);

/// Convolution of two sampled functions on lattices with a common spacing:
/// (f * g)(x_o) = h^-p sum_j a_j b_{o-j} with a = w f and b = w g the node masses.
/// The output lives on the trapezoid grid spanning the Minkowski sum of the boxes.
GridFunction convolve_sampled(const GridFunction& f, const GridFunction& g);

struct YoungCheck {
    double q = 1.0;
    double r = 1.0;
    bool case_one = true;  // q = 1: ||f*g||_r <= ||f||_1 ||g||_r
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

/// Case q = 1 (any r) or conjugate 1/q + 1/r = 1 with the sup of f * g on the left.
YoungCheck young_inequality_check(const GridFunction& f, const GridFunction& g, double q, double r);

/// Samples f on a lattice over `widened` with the spacing of `support_grid`, which must
/// span f.support. Nodes outside the support are 0; support-edge nodes that the widened
/// box strictly passes hold f/2, the midpoint of the jump, which keeps the mass exact.
GridFunction zero_extend(const TargetDensity& f, const SupportBox& widened,
                         const TensorGrid& support_grid);

/// zero_extend on the target's default grid.
GridFunction zero_extend(const TargetDensity& f, const SupportBox& widened);

/// The part of h on nodes inside `box`; the box must be spanned by lattice nodes.
GridFunction restrict_to(const GridFunction& h, const SupportBox& box);

} // namespace mixapprox
