#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mixapprox {

/// Largest ambient dimension supported by tensor-grid operations.
inline constexpr int kMaxDim = 3;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;

/// A point of R^p, p <= kMaxDim. Dynamic size with fixed capacity, so no heap traffic.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Samples are stored one per row (N x p).
using Samples = Eigen::MatrixXd;

using Rng = std::mt19937_64;

/// Raised when inputs violate an operation's preconditions (CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a density that must be positive vanishes where it is needed.
class SupportError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Uniform draw in the open interval (0, 1) from the top 53 bits of the engine.
inline double uniform01(Rng& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// splitmix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace mixapprox
