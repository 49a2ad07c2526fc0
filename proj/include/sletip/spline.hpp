#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "sletip/errors.hpp"

namespace sletip {

// Natural cubic smoothing spline (Reinsch form): minimizes
//   sum_i w_i (y_i - f(x_i))^2 + lambda * int f''^2.
// The fitted values and both derivatives at the nodes are linear in y; the
// corresponding smoother matrices are kept so that downstream statistics can
// propagate per-node standard errors. The penalty is chosen by generalized
// cross-validation over a log-spaced grid unless given explicitly.
struct SmoothingSpline {
    std::vector<double> x;
    std::vector<double> value, d1, d2;
    double lambda = 0.0;
    Eigen::MatrixXd s0, s1, s2; // maps y -> value, d1, d2
};

namespace detail {

struct SplineOperators {
    Eigen::MatrixXd to_value, to_d1, to_d2;
};

// Build the linear maps y -> (f, f', f'') at the nodes for a fixed penalty.
inline SplineOperators spline_operators(std::span<const double> x, std::span<const double> w,
                                        double lambda) {
    const int m = int(x.size());
    const int mi = m - 2;
    Eigen::VectorXd h(m - 1);
    for (int i = 0; i + 1 < m; ++i) {
        h[i] = x[i + 1] - x[i];
        if (!(h[i] > 0.0)) throw invalid_parameter("smoothing spline: nodes must increase");
    }

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, mi);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(mi, mi);
    for (int j = 0; j < mi; ++j) {
        q(j, j) = 1.0 / h[j];
        q(j + 1, j) = -1.0 / h[j] - 1.0 / h[j + 1];
        q(j + 2, j) = 1.0 / h[j + 1];
        r(j, j) = (h[j] + h[j + 1]) / 3.0;
        if (j + 1 < mi) {
            r(j, j + 1) = h[j + 1] / 6.0;
            r(j + 1, j) = h[j + 1] / 6.0;
        }
    }

    Eigen::VectorXd winv(m);
    for (int i = 0; i < m; ++i) winv[i] = 1.0 / w[i];

    // gamma = (R + lambda Q^T W^-1 Q)^-1 Q^T y ;  f = y - lambda W^-1 Q gamma
    Eigen::MatrixXd lhs = r + lambda * (q.transpose() * winv.asDiagonal() * q);
    Eigen::MatrixXd gamma_map = lhs.ldlt().solve(q.transpose());
    Eigen::MatrixXd f_map = Eigen::MatrixXd::Identity(m, m) -
                            lambda * winv.asDiagonal() * q * gamma_map;

    // second derivatives at all nodes (natural: zero at the ends);
    // gamma itself is the vector of interior second derivatives
    Eigen::MatrixXd sig_map = Eigen::MatrixXd::Zero(m, m);
    sig_map.block(1, 0, mi, m) = gamma_map;

    // first derivatives from the cubic pieces
    Eigen::MatrixXd d1_map = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        if (i + 1 < m) {
            d1_map.row(i) = (f_map.row(i + 1) - f_map.row(i)) / h[i] -
                            h[i] / 6.0 * (2.0 * sig_map.row(i) + sig_map.row(i + 1));
        } else {
            d1_map.row(i) = (f_map.row(i) - f_map.row(i - 1)) / h[i - 1] +
                            h[i - 1] / 6.0 * (sig_map.row(i - 1) + 2.0 * sig_map.row(i));
        }
    }
    return {f_map, d1_map, sig_map};
}

} // namespace detail

inline SmoothingSpline fit_smoothing_spline(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> stderr_,
                                            std::optional<double> lambda = std::nullopt) {
    const int m = int(x.size());
    if (m < 6 || y.size() != x.size() || stderr_.size() != x.size())
        throw insufficient_bins("smoothing spline: need at least 6 matching nodes");

    // weights from inverse variances, floored at the median to keep
    // zero-stderr nodes from dominating
    std::vector<double> se(stderr_.begin(), stderr_.end());
    std::vector<double> sorted = se;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double floor_se = median > 0.0 ? 1e-3 * median : 1e-12;
    std::vector<double> w(se.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < se.size(); ++i) {
        const double s = std::max(se[i], floor_se);
        w[i] = 1.0 / (s * s);
        wsum += w[i];
    }
    for (double& wi : w) wi *= double(m) / wsum; // mean weight 1, stabilizes lambda scale

    Eigen::Map<const Eigen::VectorXd> yv(y.data(), m);

    double best_lambda = lambda.value_or(0.0);
    if (!lambda) {
        // GCV over a log grid
        double best_score = 1e300;
        const double span = x[m - 1] - x[0];
        for (int k = 0; k <= 40; ++k) {
            const double lam = std::pow(10.0, -10.0 + 0.25 * double(k)) * std::pow(span, 3);
            const auto ops = detail::spline_operators(x, w, lam);
            const Eigen::VectorXd f = ops.to_value * yv;
            double rss = 0.0;
            for (int i = 0; i < m; ++i) rss += w[i] * (y[i] - f[i]) * (y[i] - f[i]);
            const double tr = ops.to_value.trace();
            const double denom = double(m) - tr;
            if (denom <= 1e-6) continue;
            const double score = double(m) * rss / (denom * denom);
            if (score < best_score) {
                best_score = score;
                best_lambda = lam;
            }
        }
    }

    const auto ops = detail::spline_operators(x, w, best_lambda);
    SmoothingSpline out;
    out.x.assign(x.begin(), x.end());
    out.lambda = best_lambda;
    out.s0 = ops.to_value;
    out.s1 = ops.to_d1;
    out.s2 = ops.to_d2;
    const Eigen::VectorXd f = ops.to_value * yv;
    const Eigen::VectorXd d1 = ops.to_d1 * yv;
    const Eigen::VectorXd d2 = ops.to_d2 * yv;
    out.value.assign(f.data(), f.data() + m);
    out.d1.assign(d1.data(), d1.data() + m);
    out.d2.assign(d2.data(), d2.data() + m);
    return out;
}

} // namespace sletip
