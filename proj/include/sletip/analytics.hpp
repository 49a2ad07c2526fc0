#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sletip/errors.hpp"
#include "sletip/gamma.hpp"
#include "sletip/quadrature.hpp"
#include "sletip/spline.hpp"

namespace sletip {

inline constexpr double pi_const = 3.14159265358979323846;

// Finiteness phase of the negative moment E (Im)^{-2n}: finite iff
// kappa < 8 / (2n - 1).
struct MomentPhase {
    int n = 1;
    double kappa_critical() const { return 8.0 / (2.0 * double(n) - 1.0); }
    bool is_finite(double kappa) const { return kappa < kappa_critical(); }
};

struct MomentValue {
    bool finite = true;
    double value = 0.0; // +infinity when not finite
};

// E (Im)^{-2} = 2 / (8 - kappa) for kappa < 8.
inline MomentValue moment_neg2(double kappa) {
    if (!(kappa >= 0.0)) throw invalid_parameter("moment_neg2: kappa must be >= 0");
    if (!MomentPhase{1}.is_finite(kappa))
        return {false, std::numeric_limits<double>::infinity()};
    return {true, 2.0 / (8.0 - kappa)};
}

// Closed-form expression 16(3-kappa) / ((12-kappa)(8-kappa)(8-3kappa));
// meaningful as the moment only inside the kappa < 8/3 phase.
inline double moment_neg4_formula(double kappa) {
    return 16.0 * (3.0 - kappa) / ((12.0 - kappa) * (8.0 - kappa) * (8.0 - 3.0 * kappa));
}

inline MomentValue moment_neg4(double kappa) {
    if (!(kappa >= 0.0)) throw invalid_parameter("moment_neg4: kappa must be >= 0");
    if (!MomentPhase{2}.is_finite(kappa))
        return {false, std::numeric_limits<double>::infinity()};
    return {true, moment_neg4_formula(kappa)};
}

// Constant of the I1 law, Gamma(1 + 4/kappa) / (4 sqrt(pi) Gamma(1/2 + 4/kappa)).
inline double i1_constant(double kappa) {
    if (!(kappa > 0.0)) throw invalid_parameter("i1_constant: kappa must be > 0");
    const double q = 4.0 / kappa;
    return gamma_fn(1.0 + q) / (4.0 * std::sqrt(pi_const) * gamma_fn(0.5 + q));
}

// I1(alpha) = i1_constant * sin(alpha)^{8/kappa - 2} on (0, pi).
inline double i1_closed_form(double alpha, double kappa) {
    if (!(alpha > 0.0 && alpha < pi_const))
        throw invalid_parameter("i1_closed_form: alpha must lie in (0, pi)");
    return i1_constant(kappa) * std::pow(std::sin(alpha), 8.0 / kappa - 2.0);
}

// Occupation-density constant of the expected occupation-time identity, and
// its reciprocal C_{kappa,1}.
inline double occupation_density_constant(double kappa) { return 2.0 * i1_constant(kappa); }
inline double c_kappa_1(double kappa) { return 1.0 / occupation_density_constant(kappa); }

// Expected total time the trace spends in
//   { arccot(x/y) in [alpha_lo, alpha_hi], y^2 in [u_lo, u_hi] }:
//   (u_hi - u_lo)/2 * occupation_density_constant * int sin^{8/kappa-2}.
inline double expected_occupation(double alpha_lo, double alpha_hi, double u_lo, double u_hi,
                                  double kappa) {
    if (!(0.0 < alpha_lo && alpha_lo <= alpha_hi && alpha_hi < pi_const))
        throw invalid_parameter("expected_occupation: need 0 < alpha_lo <= alpha_hi < pi");
    if (!(0.0 < u_lo && u_lo <= u_hi))
        throw invalid_parameter("expected_occupation: need 0 < u_lo <= u_hi");
    if (!(kappa > 0.0)) throw invalid_parameter("expected_occupation: kappa must be > 0");
    if (u_lo == u_hi || alpha_lo == alpha_hi) return 0.0;
    const double integral = integrate_sin_power(8.0 / kappa - 2.0, alpha_lo, alpha_hi, 1e-10);
    return 0.5 * (u_hi - u_lo) * occupation_density_constant(kappa) * integral;
}

// Binned estimate of I_n(alpha) = int u^{-n} phi(alpha, u) du on uniform
// alpha bins. Empty bins are reported as missing (NaN value, zero count).
struct InProfile {
    int n = 0;
    std::vector<double> alphas;
    std::vector<double> values;
    std::vector<double> standard_errors;
    std::vector<std::int64_t> counts;

    bool missing(std::size_t i) const { return counts.empty() ? false : counts[i] == 0; }
};

// Closed-form I1 sampled on the given alpha grid, zero standard errors.
inline InProfile analytic_i1_profile(double kappa, std::span<const double> alphas) {
    InProfile p;
    p.n = 1;
    p.alphas.assign(alphas.begin(), alphas.end());
    p.values.reserve(alphas.size());
    for (double a : alphas) p.values.push_back(i1_closed_form(a, kappa));
    p.standard_errors.assign(alphas.size(), 0.0);
    p.counts.assign(alphas.size(), 1);
    return p;
}

struct ProfileIntegral {
    double value = 0.0;
    double stderr_ = 0.0; // propagated bin errors plus the endpoint truncation estimate
};

// Trapezoidal integral of weight(alpha) * profile(alpha) with the first and
// last `exclude_bins` bins excluded. The excluded end regions are estimated
// from the outermost included bins and folded into the error bar; the
// endpoint integrals can genuinely diverge in some phases, so the truncation
// must stay visible rather than silently extrapolated.
template <typename WeightFn>
ProfileIntegral profile_integral(const InProfile& p, const WeightFn& weight,
                                 int exclude_bins = 3) {
    const int m = int(p.alphas.size());
    std::vector<double> xs, fs, ses;
    for (int i = exclude_bins; i < m - exclude_bins; ++i) {
        if (p.missing(std::size_t(i)) || !std::isfinite(p.values[i])) continue;
        xs.push_back(p.alphas[i]);
        fs.push_back(weight(p.alphas[i]) * p.values[i]);
        ses.push_back(weight(p.alphas[i]) * p.standard_errors[i]);
    }
    if (xs.size() < 3) throw insufficient_bins("profile_integral: too few usable bins");

    ProfileIntegral out;
    double var = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double w = 0.5 * (xs[i + 1] - xs[i]);
        out.value += w * (fs[i] + fs[i + 1]);
    }
    // node weights for error propagation
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double w = 0.0;
        if (i > 0) w += 0.5 * (xs[i] - xs[i - 1]);
        if (i + 1 < xs.size()) w += 0.5 * (xs[i + 1] - xs[i]);
        var += w * w * ses[i] * ses[i];
    }
    const double trunc = std::abs(fs.front()) * (xs.front() - 0.0) +
                         std::abs(fs.back()) * (pi_const - xs.back());
    out.stderr_ = std::sqrt(var) + trunc;
    return out;
}

// Residuals of the two integral identities linking consecutive profiles:
//   (a)  int I_{n+1} sin^2  -  (1/4) int I_n
//   (b)  (4n + 8 - kappa) int I_{n+1}  -  n int I_n / sin^2  -  2 int I_n
// plus identity (b) solved for int I_{n+1}. Errors are propagated per bin,
// treating the two profiles as independent (their positive correlation makes
// this slightly conservative).
struct IdentityReport {
    double residual_a = 0.0, stderr_a = 0.0;
    double residual_b = 0.0, stderr_b = 0.0;
    double int_in1_direct = 0.0, int_in1_direct_stderr = 0.0;
    double int_in1_solved = 0.0, int_in1_solved_stderr = 0.0;
};

inline IdentityReport in_identity_residuals(const InProfile& pn, const InProfile& pn1,
                                            double kappa, int exclude_bins = 3) {
    if (pn.alphas.size() != pn1.alphas.size())
        throw grid_mismatch("in_identity_residuals: profiles on different grids");
    for (std::size_t i = 0; i < pn.alphas.size(); ++i)
        if (pn.alphas[i] != pn1.alphas[i])
            throw grid_mismatch("in_identity_residuals: profiles on different grids");
    if (pn1.n != pn.n + 1)
        throw invalid_parameter("in_identity_residuals: profiles must be consecutive orders");
    const double n = double(pn.n);

    auto one = [](double) { return 1.0; };
    auto sin2 = [](double a) { const double s = std::sin(a); return s * s; };
    auto inv_sin2 = [](double a) { const double s = std::sin(a); return 1.0 / (s * s); };

    const auto a1 = profile_integral(pn1, sin2, exclude_bins);     // int I_{n+1} sin^2
    const auto a2 = profile_integral(pn, one, exclude_bins);       // int I_n
    const auto a3 = profile_integral(pn, inv_sin2, exclude_bins);  // int I_n / sin^2
    const auto a4 = profile_integral(pn1, one, exclude_bins);      // int I_{n+1}

    IdentityReport r;
    r.residual_a = a1.value - 0.25 * a2.value;
    r.stderr_a = std::sqrt(a1.stderr_ * a1.stderr_ + 0.0625 * a2.stderr_ * a2.stderr_);
    const double coeff = 4.0 * n + 8.0 - kappa;
    r.residual_b = coeff * a4.value - n * a3.value - 2.0 * a2.value;
    r.stderr_b = std::sqrt(coeff * coeff * a4.stderr_ * a4.stderr_ +
                           n * n * a3.stderr_ * a3.stderr_ + 4.0 * a2.stderr_ * a2.stderr_);
    r.int_in1_direct = a4.value;
    r.int_in1_direct_stderr = a4.stderr_;
    r.int_in1_solved = (n * a3.value + 2.0 * a2.value) / coeff;
    r.int_in1_solved_stderr = std::sqrt(n * n * a3.stderr_ * a3.stderr_ +
                                        4.0 * a2.stderr_ * a2.stderr_) /
                              coeff;
    return r;
}

// Identity (b) solved for int I_{n+1} straight from the closed-form I_n
// (only available for n = 1): quadrature only, no binning error.
inline double integral_i2_from_identity(double kappa) {
    if (!(kappa > 0.0 && kappa < 8.0 / 3.0))
        throw invalid_parameter("integral_i2_from_identity: needs kappa in (0, 8/3)");
    const double c = i1_constant(kappa);
    const double int_i1 = c * integrate_sin_power(8.0 / kappa - 2.0, 0.0, pi_const, 1e-12);
    const double int_i1_inv_sin2 =
        c * integrate_sin_power(8.0 / kappa - 4.0, 0.0, pi_const, 1e-12);
    return (int_i1_inv_sin2 + 2.0 * int_i1) / (12.0 - kappa);
}

// Pointwise residual of the profile recursion ODE
//   0 = n I_n - 4n sin^2 I_{n+1} + (kappa-4)(3 sin^2 cos^2 - sin^4) I_{n+1}
//       + (3kappa-4) sin^3 cos I_{n+1}' + (kappa/2) sin^4 I_{n+1}''.
struct OdeResidualReport {
    std::vector<double> alpha;
    std::vector<double> residual;
    std::vector<double> stderr_;
    double spline_lambda = 0.0;
};

namespace detail {
inline double iq_ode_combine(double n, double kappa, double a, double in_value, double f,
                             double f1, double f2) {
    const double s = std::sin(a), c = std::cos(a);
    const double s2 = s * s;
    return n * in_value - 4.0 * n * s2 * f + (kappa - 4.0) * (3.0 * s2 * c * c - s2 * s2) * f +
           (3.0 * kappa - 4.0) * s2 * s * c * f1 + 0.5 * kappa * s2 * s2 * f2;
}
} // namespace detail

// Closed-form check for n = 0: the analytic I1 and its exact derivatives
// satisfy the ODE identically.
inline std::vector<double> i1_ode_residual_closed_form(double kappa,
                                                       std::span<const double> alphas) {
    std::vector<double> out;
    out.reserve(alphas.size());
    const double c0 = i1_constant(kappa);
    const double e = 8.0 / kappa - 2.0;
    for (double a : alphas) {
        const double s = std::sin(a), c = std::cos(a);
        const double f = c0 * std::pow(s, e);
        const double f1 = c0 * e * std::pow(s, e - 1.0) * c;
        const double f2 = c0 * e * ((e - 1.0) * std::pow(s, e - 2.0) * c * c - std::pow(s, e));
        out.push_back(detail::iq_ode_combine(0.0, kappa, a, 0.0, f, f1, f2));
    }
    return out;
}

// MC route: smooth the noisy I_{n+1} profile with a cross-validated cubic
// smoothing spline before taking second differences, then propagate the
// per-bin errors through the (linear) smoother.
inline OdeResidualReport iq_ode_residual(const InProfile& pn1, const InProfile& pn, double kappa,
                                         std::optional<double> lambda = std::nullopt) {
    if (pn.alphas.size() != pn1.alphas.size())
        throw grid_mismatch("iq_ode_residual: profiles on different grids");
    if (pn1.n != pn.n + 1)
        throw invalid_parameter("iq_ode_residual: profiles must be consecutive orders");

    std::vector<double> xs, ys, ses, ref, ref_se;
    for (std::size_t i = 0; i < pn1.alphas.size(); ++i) {
        if (pn1.missing(i) || pn.missing(i)) continue;
        if (!std::isfinite(pn1.values[i]) || !std::isfinite(pn.values[i])) continue;
        xs.push_back(pn1.alphas[i]);
        ys.push_back(pn1.values[i]);
        ses.push_back(pn1.standard_errors[i]);
        ref.push_back(pn.values[i]);
        ref_se.push_back(pn.standard_errors[i]);
    }
    if (xs.size() < 8) throw insufficient_bins("iq_ode_residual: too few usable bins");

    const auto spline = fit_smoothing_spline(xs, ys, ses, lambda);
    const double n = double(pn.n);

    OdeResidualReport rep;
    rep.spline_lambda = spline.lambda;
    const int m = int(xs.size());
    for (int j = 1; j + 1 < m; ++j) {
        const double a = xs[j];
        const double s = std::sin(a), c = std::cos(a);
        const double s2 = s * s;
        rep.alpha.push_back(a);
        rep.residual.push_back(detail::iq_ode_combine(n, kappa, a, ref[j], spline.value[j],
                                                      spline.d1[j], spline.d2[j]));
        // row of the linear map from the raw profile values to the residual
        double var = 0.0;
        const double w0 = -4.0 * n * s2 + (kappa - 4.0) * (3.0 * s2 * c * c - s2 * s2);
        const double w1 = (3.0 * kappa - 4.0) * s2 * s * c;
        const double w2 = 0.5 * kappa * s2 * s2;
        for (int i = 0; i < m; ++i) {
            const double coeff = w0 * spline.s0(j, i) + w1 * spline.s1(j, i) +
                                 w2 * spline.s2(j, i);
            var += coeff * coeff * ses[i] * ses[i];
        }
        var += n * n * ref_se[j] * ref_se[j];
        rep.stderr_.push_back(std::sqrt(var));
    }
    return rep;
}

} // namespace sletip
