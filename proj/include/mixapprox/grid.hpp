#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mixapprox/common.hpp"

namespace mixapprox {

/// Axis-aligned box [lower, upper] in R^p.
class SupportBox {
public:
    SupportBox(Vector lower, Vector upper);

    static SupportBox cube(int dim, double lower, double upper);

    int dim() const { return static_cast<int>(lower_.size()); }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    double width(int axis) const { return upper_[axis] - lower_[axis]; }
    double volume() const;

    bool contains(const Point& x, double slack = 0.0) const;
    bool contains(const SupportBox& other, double slack = 0.0) const;
    bool approx_equal(const SupportBox& other, double tol = 1e-12) const;

private:
    Vector lower_;
    Vector upper_;
};

enum class QuadratureRule { trapezoid, simpson };

QuadratureRule parse_rule(std::string_view name);
std::string_view to_string(QuadratureRule rule);

/// Tensor product of equispaced per-axis quadrature rules on a box.
/// Flat indices run with axis 0 fastest, matching Eigen's column-major storage.
class TensorGrid {
public:
    TensorGrid(SupportBox box, int points_per_axis, QuadratureRule rule);
    TensorGrid(SupportBox box, std::vector<int> counts, QuadratureRule rule);

    const SupportBox& box() const { return box_; }
    int dim() const { return box_.dim(); }
    QuadratureRule rule() const { return rule_; }
    int count(int axis) const { return counts_[axis]; }
    const std::vector<int>& counts() const { return counts_; }
    /// Common per-axis count; throws if the axes differ.
    int points_per_axis() const;
    Eigen::Index size() const { return size_; }

    const Vector& nodes(int axis) const { return nodes_[axis]; }
    const Vector& weights(int axis) const { return weights_[axis]; }
    double spacing(int axis) const;

    std::array<int, kMaxDim> unravel(Eigen::Index flat) const;
    Point node(Eigen::Index flat) const;
    /// Products of per-axis weights, one per node.
    const Array& tensor_weights() const { return tensor_weights_; }

    bool same_layout(const TensorGrid& other, double tol = 1e-12) const;

private:
    SupportBox box_;
    std::vector<int> counts_;
    QuadratureRule rule_;
    std::vector<Vector> nodes_;
    std::vector<Vector> weights_;
    Array tensor_weights_;
    Eigen::Index size_ = 0;
};

/// Values of a function sampled at the nodes of a TensorGrid.
struct GridFunction {
    TensorGrid grid;
    Array values;

    GridFunction(TensorGrid grid, Array values);

    static GridFunction sample(const TensorGrid& grid, const std::function<double(const Point&)>& fn);
};

/// A grid with the same spacing, widened by `pad` nodes on each side of every axis.
TensorGrid widen(const TensorGrid& grid, const std::vector<int>& pad);

} // namespace mixapprox
