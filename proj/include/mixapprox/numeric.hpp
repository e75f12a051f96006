#pragma once

#include <functional>

namespace mixapprox::numeric {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
double normal_log_pdf(double x);
double normal_cdf(double x);
/// P(Z > x), accurate far into the upper tail.
double normal_upper_tail(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double u);

using Function1D = std::function<double(double)>;

/// Adaptive Simpson quadrature. Terminates when the Richardson error estimate
/// is below max(abs_tol, rel_tol * |estimate|) on every subinterval.
double integrate_adaptive(const Function1D& f, double a, double b,
                          double abs_tol = 1e-12, double rel_tol = 1e-10, int max_depth = 48);

/// Golden-section minimisation of a unimodal function on [a, b]; returns the abscissa.
double golden_section_minimize(const Function1D& f, double a, double b, double tol = 1e-10);

/// Root of a sign-changing function on [a, b] by bisection.
double bisect(const Function1D& f, double a, double b, double tol = 1e-14);

} // namespace mixapprox::numeric
