#include "mixapprox/grid.hpp"

#include <cmath>
#include <utility>

namespace mixapprox {

SupportBox::SupportBox(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.size() == 0 || lower_.size() != upper_.size()) {
        throw ValidationError("SupportBox: bounds must be non-empty and of equal dimension");
    }
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
            throw ValidationError("SupportBox: need finite lower < upper on every axis");
        }
    }
}

SupportBox SupportBox::cube(int dim, double lower, double upper)
{
    return SupportBox(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

double SupportBox::volume() const
{
    return (upper_ - lower_).prod();
}

bool SupportBox::contains(const Point& x, double slack) const
{
    for (int i = 0; i < dim(); ++i) {
        if (x[i] < lower_[i] - slack || x[i] > upper_[i] + slack) {
            return false;
        }
    }
    return true;
}

bool SupportBox::contains(const SupportBox& other, double slack) const
{
    if (other.dim() != dim()) {
        return false;
    }
    return ((other.lower_.array() >= lower_.array() - slack) &&
            (other.upper_.array() <= upper_.array() + slack))
        .all();
}

bool SupportBox::approx_equal(const SupportBox& other, double tol) const
{
    return other.dim() == dim() && ((lower_ - other.lower_).cwiseAbs().array() <= tol).all() &&
           ((upper_ - other.upper_).cwiseAbs().array() <= tol).all();
}

QuadratureRule parse_rule(std::string_view name)
{
    if (name == "trapezoid") {
        return QuadratureRule::trapezoid;
    }
    if (name == "simpson") {
        return QuadratureRule::simpson;
    }
    throw ValidationError("unknown quadrature rule '" + std::string(name) + "'");
}

std::string_view to_string(QuadratureRule rule)
{
    return rule == QuadratureRule::simpson ? "simpson" : "trapezoid";
}

TensorGrid::TensorGrid(SupportBox box, int points_per_axis, QuadratureRule rule)
    : TensorGrid(box, std::vector<int>(static_cast<std::size_t>(box.dim()), points_per_axis), rule)
{
}

TensorGrid::TensorGrid(SupportBox box, std::vector<int> counts, QuadratureRule rule)
    : box_(std::move(box)), counts_(std::move(counts)), rule_(rule)
{
    const int p = box_.dim();
    if (p > kMaxDim) {
        throw ValidationError("TensorGrid: dimension above " + std::to_string(kMaxDim));
    }
    if (static_cast<int>(counts_.size()) != p) {
        throw ValidationError("TensorGrid: one point count per axis required");
    }
    size_ = 1;
    for (int axis = 0; axis < p; ++axis) {
        const int n = counts_[axis];
        if (n < 2) {
            throw ValidationError("TensorGrid: at least 2 points per axis");
        }
        if (rule_ == QuadratureRule::simpson && (n % 2 == 0)) {
            throw ValidationError("TensorGrid: simpson rule requires an odd point count");
        }
        const double lo = box_.lower(axis);
        const double h = box_.width(axis) / (n - 1);
        Vector x(n);
        for (int i = 0; i < n; ++i) {
            x[i] = lo + i * h;
        }
        x[n - 1] = box_.upper(axis);

        Vector w(n);
        if (rule_ == QuadratureRule::trapezoid) {
            w.setConstant(h);
            w[0] = w[n - 1] = 0.5 * h;
        } else {
            for (int i = 0; i < n; ++i) {
                w[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
            }
            w[0] = w[n - 1] = h / 3.0;
        }
        nodes_.push_back(std::move(x));
        weights_.push_back(std::move(w));
        size_ *= n;
    }

    tensor_weights_.resize(size_);
    for (Eigen::Index flat = 0; flat < size_; ++flat) {
        const auto idx = unravel(flat);
        double w = 1.0;
        for (int axis = 0; axis < p; ++axis) {
            w *= weights_[axis][idx[axis]];
        }
        tensor_weights_[flat] = w;
    }
}

int TensorGrid::points_per_axis() const
{
    for (int n : counts_) {
        if (n != counts_.front()) {
            throw ValidationError("TensorGrid: axes have different point counts");
        }
    }
    return counts_.front();
}

double TensorGrid::spacing(int axis) const
{
    return box_.width(axis) / (counts_[axis] - 1);
}

std::array<int, kMaxDim> TensorGrid::unravel(Eigen::Index flat) const
{
    std::array<int, kMaxDim> idx{};
    for (int axis = 0; axis < dim(); ++axis) {
        idx[axis] = static_cast<int>(flat % counts_[axis]);
        flat /= counts_[axis];
    }
    return idx;
}

Point TensorGrid::node(Eigen::Index flat) const
{
    const auto idx = unravel(flat);
    Point x(dim());
    for (int axis = 0; axis < dim(); ++axis) {
        x[axis] = nodes_[axis][idx[axis]];
    }
    return x;
}

bool TensorGrid::same_layout(const TensorGrid& other, double tol) const
{
    return rule_ == other.rule_ && counts_ == other.counts_ && box_.approx_equal(other.box_, tol);
}

GridFunction::GridFunction(TensorGrid g, Array v) : grid(std::move(g)), values(std::move(v))
{
    if (values.size() != grid.size()) {
        throw ValidationError("GridFunction: value count does not match grid size");
    }
}

GridFunction GridFunction::sample(const TensorGrid& grid,
                                  const std::function<double(const Point&)>& fn)
{
    Array values(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        values[i] = fn(grid.node(i));
    }
    return GridFunction(grid, std::move(values));
}

TensorGrid widen(const TensorGrid& grid, const std::vector<int>& pad)
{
    const int p = grid.dim();
    Vector lo(p), hi(p);
    std::vector<int> counts(static_cast<std::size_t>(p));
    for (int axis = 0; axis < p; ++axis) {
        const double h = grid.spacing(axis);
        lo[axis] = grid.box().lower(axis) - pad[axis] * h;
        hi[axis] = grid.box().upper(axis) + pad[axis] * h;
        counts[axis] = grid.count(axis) + 2 * pad[axis];
    }
    return TensorGrid(SupportBox(lo, hi), counts, grid.rule());
}

} // namespace mixapprox
