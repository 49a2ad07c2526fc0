#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

#include "sletip/diffusion.hpp"
#include "sletip/errors.hpp"
#include "sletip/grid.hpp"

namespace sletip {

// Residual statistics of a candidate density under one of the stationary
// operators, computed over interior cells only (two cells nearest each
// boundary are masked out). l1 and l2 are cell-measure weighted.
struct FpkResidual {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double interior_mask_fraction = 0.0;
};

namespace detail {

template <typename ResidualFn>
FpkResidual residual_norms(const DensityGrid& g, const ResidualFn& res, DensityGrid* field) {
    if (g.n1 < 5 || g.n2 < 5) throw grid_too_small("residual: grid must be at least 5x5");
    if (field != nullptr) {
        *field = g;
        field->values.assign(g.values.size(), 0.0);
    }
    FpkResidual out;
    const double vol = g.cell_measure();
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
    std::size_t count = 0;
    for (int j = 2; j < g.n2 - 2; ++j) {
        for (int i = 2; i < g.n1 - 2; ++i) {
            const double r = res(i, j);
            if (field != nullptr) field->at(i, j) = r;
            l1 += std::abs(r);
            l2 += r * r;
            linf = std::max(linf, std::abs(r));
            ++count;
        }
    }
    out.l1 = l1 * vol;
    out.l2 = std::sqrt(l2 * vol);
    out.linf = linf;
    out.interior_mask_fraction = double(count) / double(g.values.size());
    return out;
}

} // namespace detail

// Cartesian-chart stationary operator applied by central differences:
//   (kappa/2) psi_xx + (x/2 + 2x/r2) psi_x + (y/2 - 2y/r2) psi_y
//     + (1 + 4(y^2 - x^2)/r2^2) psi,   r2 = x^2 + y^2.
inline FpkResidual residual_cartesian(const DensityGrid& g, double kappa,
                                      DensityGrid* field = nullptr) {
    if (g.chart != Chart::cartesian)
        throw chart_mismatch("residual_cartesian: grid must be in the cartesian chart");
    if (!(g.c2_min > 0.0))
        throw invalid_parameter("residual_cartesian: y range must lie in (0, inf)");
    const double hx = g.h1(), hy = g.h2();
    return detail::residual_norms(g, [&](int i, int j) {
        const double x = g.c1_center(i), y = g.c2_center(j);
        const double r2 = x * x + y * y;
        const double v = g.at(i, j);
        const double vx = (g.at(i + 1, j) - g.at(i - 1, j)) / (2.0 * hx);
        const double vy = (g.at(i, j + 1) - g.at(i, j - 1)) / (2.0 * hy);
        const double vxx = (g.at(i + 1, j) - 2.0 * v + g.at(i - 1, j)) / (hx * hx);
        return 0.5 * kappa * vxx + (0.5 * x + 2.0 * x / r2) * vx +
               (0.5 * y - 2.0 * y / r2) * vy +
               (1.0 + 4.0 * (y * y - x * x) / (r2 * r2)) * v;
    }, field);
}

// Log-chart stationary operator L* p = (kappa/2) p_xx - d_x(b1 p) - d_z(b2 p)
// applied by central differences; this is the equation the solver targets.
inline FpkResidual residual_log(const DensityGrid& g, double kappa,
                                DensityGrid* field = nullptr) {
    if (g.chart != Chart::log_im)
        throw chart_mismatch("residual_log: grid must be in the log chart");
    const double hx = g.h1(), hz = g.h2();
    auto flux1 = [&](int i, int j) {
        const auto [b1, b2] = drift_log(g.c1_center(i), g.c2_center(j));
        (void)b2;
        return b1 * g.at(i, j);
    };
    auto flux2 = [&](int i, int j) {
        const auto [b1, b2] = drift_log(g.c1_center(i), g.c2_center(j));
        (void)b1;
        return b2 * g.at(i, j);
    };
    return detail::residual_norms(g, [&](int i, int j) {
        const double v = g.at(i, j);
        const double vxx = (g.at(i + 1, j) - 2.0 * v + g.at(i - 1, j)) / (hx * hx);
        const double dflux1 = (flux1(i + 1, j) - flux1(i - 1, j)) / (2.0 * hx);
        const double dflux2 = (flux2(i, j + 1) - flux2(i, j - 1)) / (2.0 * hz);
        return 0.5 * kappa * vxx - dflux1 - dflux2;
    }, field);
}

enum class AngularForm { nondivergence, divergence };

// Angular-chart operator, either as stated or in divergence form
//   d_u((u - 4 s^2) phi) + ((kappa-4)/u) d_a(s^3 c phi)
//     + (kappa/2u) d_a(s^4 d_a phi),   s = sin(alpha), c = cos(alpha).
// The two discrete forms agree on smooth grids to discretization order.
inline FpkResidual residual_angular(const DensityGrid& g, double kappa,
                                    AngularForm form = AngularForm::nondivergence,
                                    DensityGrid* field = nullptr) {
    if (g.chart != Chart::angular)
        throw chart_mismatch("residual_angular: grid must be in the angular chart");
    if (!(g.c1_min >= 0.0 && g.c1_max <= 3.14159265358979323846 + 1e-12 && g.c2_min > 0.0))
        throw invalid_parameter("residual_angular: need alpha in (0,pi), u > 0");
    const double ha = g.h1(), hu = g.h2();

    if (form == AngularForm::nondivergence) {
        return detail::residual_norms(g, [&](int i, int j) {
            const double a = g.c1_center(i), u = g.c2_center(j);
            const double s = std::sin(a), c = std::cos(a);
            const double v = g.at(i, j);
            const double va = (g.at(i + 1, j) - g.at(i - 1, j)) / (2.0 * ha);
            const double vu = (g.at(i, j + 1) - g.at(i, j - 1)) / (2.0 * hu);
            const double vaa = (g.at(i + 1, j) - 2.0 * v + g.at(i - 1, j)) / (ha * ha);
            const double s2 = s * s;
            return 0.5 * kappa / u * s2 * s2 * vaa + (3.0 * kappa - 4.0) / u * s2 * s * c * va +
                   (u - 4.0 * s2) * vu +
                   (kappa - 4.0) / u * (3.0 * s2 * c * c - s2 * s2) * v + v;
        }, field);
    }

    auto uflux = [&](int i, int j) {
        const double a = g.c1_center(i), u = g.c2_center(j);
        const double s = std::sin(a);
        return (u - 4.0 * s * s) * g.at(i, j);
    };
    auto aflux = [&](int i, int j) {
        const double a = g.c1_center(i);
        const double s = std::sin(a), c = std::cos(a);
        return s * s * s * c * g.at(i, j);
    };
    return detail::residual_norms(g, [&](int i, int j) {
        const double a = g.c1_center(i), u = g.c2_center(j);
        const double term_u = (uflux(i, j + 1) - uflux(i, j - 1)) / (2.0 * hu);
        const double term_a = (kappa - 4.0) / u * (aflux(i + 1, j) - aflux(i - 1, j)) / (2.0 * ha);
        // compact flux form of d_a(s^4 d_a phi) with face-centred s^4
        const double sp = std::sin(a + 0.5 * ha), sm = std::sin(a - 0.5 * ha);
        const double s4p = sp * sp * sp * sp, s4m = sm * sm * sm * sm;
        const double diff = (s4p * (g.at(i + 1, j) - g.at(i, j)) -
                             s4m * (g.at(i, j) - g.at(i - 1, j))) /
                            (ha * ha);
        return term_u + term_a + 0.5 * kappa / u * diff;
    }, field);
}

struct StationarySolveOptions {
    double top_offset_cells = 0.0; // shift of the absorbing layer, in cells, above log 2
    double shift_rel = 1e-8;       // inverse-iteration shift, relative to the smallest diagonal
    double tol = 1e-10;            // kernel residual tolerance, times the operator norm
    int max_iterations = 50;
    // Deferred-correction sweeps lifting the z-advection to second order
    // (minmod-limited MUSCL faces, applied as a source against the upwind
    // operator). 0 reproduces the pure first-order upwind solution.
    int correction_sweeps = 30;
    double correction_relax = 0.7;
};

namespace detail {

// Shifted inverse iteration against a prefactored (A - shift I). Each pass
// damps non-kernel components by a factor ~shift/gap, so the vector is
// iterated to a fixed point before the residual test is applied; stopping on
// the residual alone would accept a vector still carrying O(shift/gap)
// contamination.
inline Eigen::VectorXd inverse_iteration_kernel(
    const Eigen::SparseMatrix<double>& a, const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
    double op_norm, double tol, int max_iterations) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(a.rows(), 1.0 / double(a.rows()));
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        const double norm = w.cwiseAbs().maxCoeff();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw no_kernel_found("inverse iteration: solver returned a degenerate vector");
        w /= norm;
        const double delta = (w - v).cwiseAbs().maxCoeff();
        v = std::move(w);
        if (delta > 1e-13 && it + 1 < max_iterations) continue;
        const double residual = (a * v).cwiseAbs().maxCoeff();
        if (residual <= tol * op_norm) return v;
    }
    throw no_kernel_found("inverse iteration: no numerical kernel within tolerance");
}

inline Eigen::VectorXd inverse_iteration_kernel(const Eigen::SparseMatrix<double>& a,
                                                double op_norm, double shift, double tol,
                                                int max_iterations) {
    Eigen::SparseMatrix<double> shifted = a;
    for (int d = 0; d < shifted.outerSize(); ++d) shifted.coeffRef(d, d) -= shift;
    shifted.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw no_kernel_found("inverse iteration: factorization failed");
    return inverse_iteration_kernel(a, lu, op_norm, tol, max_iterations);
}

inline double minmod(double a, double b) noexcept {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// monotonized-central slope: sharper than plain minmod, still TVD
inline double mc_slope(double dm, double dp) noexcept {
    if (dm * dp <= 0.0) return 0.0;
    const double central = 0.5 * (dm + dp);
    const double bound = 2.0 * minmod(dm, dp);
    return std::abs(central) < std::abs(bound) ? central : bound;
}

} // namespace detail

// Solve the stationary log-chart equation L* p = 0 on
// [-x_half_width, x_half_width] x [z_min, log 2] by a conservative finite
// volume scheme: central/hybrid differencing in x (diffusive direction),
// first-order upwinding in z (drift-only direction), zero-flux walls at the
// x boundaries and at z_min, absorbing value 0 above z = log 2. The discrete
// fluxes telescope, so the operator has an exact kernel; the kernel vector is
// extracted by shifted inverse iteration, clipped, and normalized to mass 1.
inline DensityGrid solve_stationary(double kappa, int nx, int nz, double x_half_width = 8.0,
                                    double z_min = -6.0,
                                    const StationarySolveOptions& opt = {}) {
    if (!(kappa > 0.0)) throw invalid_parameter("solve_stationary: kappa must be > 0");
    if (nx < 50 || nz < 50) throw invalid_parameter("solve_stationary: need nx, nz >= 50");
    const double log2 = std::log(2.0);
    if (!(z_min < log2)) throw invalid_parameter("solve_stationary: z_min must be below log 2");

    const double hz0 = (log2 - z_min) / double(nz);
    const double z_top = log2 + opt.top_offset_cells * hz0;
    DensityGrid g = make_grid(Chart::log_im, -x_half_width, x_half_width, z_min, z_top, nx, nz);
    const double hx = g.h1(), hz = g.h2();
    const int n = nx * nz;
    auto cell = [nx](int i, int k) { return k * nx + i; };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(n) * 5);
    // accumulate (Ap)_row += coeff * p_col, from flux differences
    auto add = [&](int row, int col, double coeff) { trip.emplace_back(row, col, coeff); };

    // x faces between (i,k) and (i+1,k): flux = b1 * face_value - (kappa/2) dp/dx.
    // The advective face value is central, blended toward upwind exactly as
    // much as needed to keep the off-diagonal entries non-negative.
    for (int k = 0; k < nz; ++k) {
        const double z = g.c2_center(k);
        for (int i = 0; i + 1 < nx; ++i) {
            const double xf = g.c1_min + double(i + 1) * hx;
            const auto [b1, b2_unused] = drift_log(xf, z);
            (void)b2_unused;
            double zeta = 0.0; // upwind fraction
            const double pe = std::abs(b1) * hx;
            if (pe > kappa) zeta = 1.0 - kappa / pe;
            const double wl = 0.5 * (1.0 + (b1 > 0.0 ? zeta : -zeta));
            const double wu = 1.0 - wl; // weight of the upper (i+1) cell
            // flux = b1*(wl*p_i + wu*p_{i+1}) - (kappa/2)(p_{i+1}-p_i)/hx
            const double c_lo = b1 * wl + 0.5 * kappa / hx;
            const double c_hi = b1 * wu - 0.5 * kappa / hx;
            // (Ap)_i -= flux/hx ; (Ap)_{i+1} += flux/hx
            add(cell(i, k), cell(i, k), -c_lo / hx);
            add(cell(i, k), cell(i + 1, k), -c_hi / hx);
            add(cell(i + 1, k), cell(i, k), c_lo / hx);
            add(cell(i + 1, k), cell(i + 1, k), c_hi / hx);
            if (-c_hi < -1e-12 * (std::abs(b1) + kappa / hx) ||
                c_lo < -1e-12 * (std::abs(b1) + kappa / hx))
                throw std::logic_error("solve_stationary: M-matrix pattern violated in x");
        }
    }

    // z faces, upwinded on the sign of b2. The top boundary face only ever
    // sees b2 <= 0 there, so its upwind value is the zero ghost layer and no
    // mass leaves the domain; the bottom and x walls are zero-flux.
    for (int i = 0; i < nx; ++i) {
        const double x = g.c1_center(i);
        for (int k = 0; k + 1 < nz; ++k) {
            const double zf = g.c2_min + double(k + 1) * hz;
            const auto [b1_unused, v] = drift_log(x, zf);
            (void)b1_unused;
            const int up = v >= 0.0 ? cell(i, k) : cell(i, k + 1);
            // flux = v * p_up ; (Ap)_k -= flux/hz ; (Ap)_{k+1} += flux/hz.
            // Upwinding makes both off-diagonal contributions non-negative
            // regardless of where b2 changes sign across x^2 + e^{2z} = 4.
            add(cell(i, k), up, -v / hz);
            add(cell(i, k + 1), up, v / hz);
        }
        const auto [b1_unused, v_top] = drift_log(x, z_top);
        (void)b1_unused;
        if (v_top > 1e-14)
            throw std::logic_error("solve_stationary: outflow through the absorbing layer");
    }

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    // operator infinity norm and smallest diagonal magnitude
    double op_norm = 0.0;
    Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(n);
    double min_diag = 1e300;
    for (int outer = 0; outer < a.outerSize(); ++outer)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, outer); it; ++it) {
            row_abs[it.row()] += std::abs(it.value());
            if (it.row() == it.col()) min_diag = std::min(min_diag, std::abs(it.value()));
        }
    op_norm = row_abs.maxCoeff();

    const double shift = opt.shift_rel * min_diag;
    Eigen::SparseMatrix<double> shifted = a;
    for (int d = 0; d < shifted.outerSize(); ++d) shifted.coeffRef(d, d) -= shift;
    shifted.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw no_kernel_found("solve_stationary: factorization failed");

    Eigen::VectorXd v = detail::inverse_iteration_kernel(a, lu, op_norm, opt.tol,
                                                         opt.max_iterations);
    if (v.sum() < 0.0) v = -v;
    v /= v.sum() * hx * hz; // mass 1

    // Deferred correction: lift the z-advection to second order by iterating
    // the minmod-limited MUSCL face corrections as a source against the
    // upwind operator. The correction fluxes telescope, so each sweep
    // conserves mass exactly; the limiter reverts to first order at extrema,
    // which keeps the iteration stable at the density peak under z = log 2.
    if (opt.correction_sweeps > 0) {
        Eigen::VectorXd p = v;
        double prev_delta = 1e300;
        for (int sweep = 0; sweep < opt.correction_sweeps; ++sweep) {
            Eigen::VectorXd rhs = -shift * p;
            for (int i = 0; i < nx; ++i) {
                const double x = g.c1_center(i);
                for (int k = 0; k + 1 < nz; ++k) {
                    const double zf = g.c2_min + double(k + 1) * hz;
                    const auto [b1_unused, vf] = drift_log(x, zf);
                    (void)b1_unused;
                    double fc;
                    if (vf >= 0.0) {
                        const double dm = k > 0 ? p[cell(i, k)] - p[cell(i, k - 1)] : 0.0;
                        const double dp = p[cell(i, k + 1)] - p[cell(i, k)];
                        fc = vf * 0.5 * detail::mc_slope(dm, dp);
                    } else {
                        const double dm = p[cell(i, k + 1)] - p[cell(i, k)];
                        const double dp =
                            k + 2 < nz ? p[cell(i, k + 2)] - p[cell(i, k + 1)] : 0.0;
                        fc = -vf * 0.5 * detail::mc_slope(dm, dp);
                    }
                    rhs[cell(i, k)] += fc / hz;
                    rhs[cell(i, k + 1)] -= fc / hz;
                }
            }
            Eigen::VectorXd q = lu.solve(rhs);
            const double mass = q.sum() * hx * hz;
            if (!(mass > 0.0) || !std::isfinite(mass)) break;
            q /= mass;
            const Eigen::VectorXd next =
                (1.0 - opt.correction_relax) * p + opt.correction_relax * q;
            const double delta = (next - p).cwiseAbs().sum() * hx * hz;
            if (sweep > 1 && delta > 2.0 * prev_delta) break; // diverging, keep the stable iterate
            p = next;
            if (delta < 1e-10) break;
            prev_delta = delta;
        }
        v = p;
    }

    // clip sign noise and audit the clipped mass
    double clipped = 0.0, positive = 0.0;
    for (int idx = 0; idx < n; ++idx) {
        if (v[idx] < 0.0) {
            clipped += -v[idx];
            v[idx] = 0.0;
        } else {
            positive += v[idx];
        }
    }
    if (clipped > 0.01 * positive)
        throw negative_mass("solve_stationary: clipped more than 1% of the kernel mass");

    for (int k = 0; k < nz; ++k)
        for (int i = 0; i < nx; ++i) g.at(i, k) = v[cell(i, k)];
    g.normalize();
    return g;
}

} // namespace sletip
