#include "mixapprox/numeric.hpp"

#include <cmath>
#include <limits>

#include "mixapprox/common.hpp"

namespace mixapprox::numeric {

double normal_pdf(double x)
{
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_log_pdf(double x)
{
    return -0.5 * x * x - kLogSqrt2Pi;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / kSqrt2);
}

double normal_upper_tail(double x)
{
    return 0.5 * std::erfc(x / kSqrt2);
}

double normal_quantile(double u)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw ValidationError("normal_quantile: argument must lie in (0, 1)");
    }
    // Rational initial guess followed by one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - p_low) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Work in the smaller tail so the residual keeps its relative precision.
    const double e = x < 0.0 ? normal_cdf(x) - u : (1.0 - u) - normal_upper_tail(x);
    const double step = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

namespace {

struct SimpsonPanel {
    double a, b, fa, fm, fb, whole;
};

double adaptive_step(const Function1D& f, const SimpsonPanel& p, double abs_tol,
                     double rel_tol, int depth)
{
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double sum = left + right;
    const double err = sum - p.whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * std::max(abs_tol, rel_tol * std::abs(sum))) {
        return sum + err / 15.0;
    }
    return adaptive_step(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * abs_tol, rel_tol, depth - 1) +
           adaptive_step(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * abs_tol, rel_tol, depth - 1);
}

} // namespace

double integrate_adaptive(const Function1D& f, double a, double b, double abs_tol,
                          double rel_tol, int max_depth)
{
    if (a == b) {
        return 0.0;
    }
    // Seed with eight panels so narrow features are not skipped by the first estimate.
    constexpr int seeds = 8;
    double total = 0.0;
    const double h = (b - a) / seeds;
    for (int i = 0; i < seeds; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == seeds) ? b : lo + h;
        const double fa = f(lo);
        const double fb = f(hi);
        const double fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_step(f, {lo, hi, fa, fm, fb, whole}, abs_tol / seeds, rel_tol, max_depth);
    }
    return total;
}

double golden_section_minimize(const Function1D& f, double a, double b, double tol)
{
    constexpr double inv_phi = 0.61803398874989484820;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double bisect(const Function1D& f, double a, double b, double tol)
{
    double fa = f(a);
    if (fa == 0.0) {
        return a;
    }
    if ((fa > 0.0) == (f(b) > 0.0)) {
        throw ValidationError("bisect: no sign change on bracket");
    }
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace mixapprox::numeric
