#pragma once

#include <cmath>
#include <functional>

#include "sletip/errors.hpp"

namespace sletip {

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw quadrature_failure("adaptive_simpson: recursion limit reached");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 60) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral of sin(a)^e over [lo, hi] inside [0, pi]. For e in (-1, 0) the
// endpoints are integrable singularities; near 0 the substitution
// w = a^{1+e} turns the integrand into the smooth (sin a / a)^e, and the end
// near pi is handled by reflection.
inline double integrate_sin_power(double e, double lo, double hi, double rel_tol = 1e-12) {
    constexpr double pi = 3.14159265358979323846;
    if (!(lo >= 0.0 && hi <= pi && lo <= hi))
        throw invalid_parameter("integrate_sin_power: need 0 <= lo <= hi <= pi");
    if (e <= -1.0) throw invalid_parameter("integrate_sin_power: exponent must be > -1");
    if (lo == hi) return 0.0;

    auto plain = [e](double a) { return std::pow(std::sin(a), e); };

    // smooth part of the integrand after the w = a^{1+e} substitution
    auto transformed = [e](double w) {
        const double a = std::pow(w, 1.0 / (1.0 + e));
        const double ratio = a == 0.0 ? 1.0 : std::sin(a) / a;
        return std::pow(ratio, e) / (1.0 + e);
    };

    const double cut = 0.3;
    double total = 0.0;
    const double scale_guess = std::max(hi - lo, 0.1);

    auto near_zero = [&](double a0, double a1) {
        const double w0 = std::pow(a0, 1.0 + e);
        const double w1 = std::pow(a1, 1.0 + e);
        return adaptive_simpson(transformed, w0, w1, rel_tol * scale_guess);
    };

    // split [lo, hi] into (near 0) + (middle) + (near pi)
    const double a_mid_lo = std::min(hi, std::max(lo, cut));
    const double a_mid_hi = std::max(lo, std::min(hi, pi - cut));
    if (lo < cut) total += near_zero(lo, std::min(hi, cut));
    if (a_mid_hi > a_mid_lo) total += adaptive_simpson(plain, a_mid_lo, a_mid_hi, rel_tol * scale_guess);
    if (hi > pi - cut) {
        const double b0 = pi - hi;
        const double b1 = pi - std::max(lo, pi - cut);
        total += near_zero(b0, b1);
    }
    return total;
}

} // namespace sletip
