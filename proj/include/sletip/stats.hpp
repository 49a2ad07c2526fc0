#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sletip/errors.hpp"

namespace sletip {

// Neumaier compensated summation; the running reduction is order-insensitive
// to well below 1e-12, which keeps aggregate statistics thread-count
// invariant when sample columns are filled by stream index.
inline double compensated_sum(std::span<const double> xs) noexcept {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Mean with the delete-1 jackknife standard error (for a sample mean this is
// the usual s / sqrt(n)).
inline MeanStderr mean_with_stderr(std::span<const double> xs) {
    const auto n = xs.size();
    if (n == 0) throw empty_set("mean_with_stderr: empty sample");
    const double mean = compensated_sum(xs) / double(n);
    if (n == 1) return {mean, 0.0};
    double ss = 0.0, comp = 0.0;
    for (double x : xs) {
        const double d = (x - mean) * (x - mean);
        const double t = ss + d;
        comp += (std::abs(ss) >= d) ? (ss - t) + d : (d - t) + ss;
        ss = t;
    }
    ss += comp;
    const double var = ss / double(n - 1);
    return {mean, std::sqrt(var / double(n))};
}

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_q(double lambda) noexcept {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double distance = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov distance and asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw empty_set("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double va = a[ia], vb = b[ib];
        if (va <= vb) ++ia;
        if (vb <= va) ++ib;
        d = std::max(d, std::abs(double(ia) / na - double(ib) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    return {d, kolmogorov_q(lambda)};
}

// Hill estimator for the upper-tail index of `values` using the k largest
// order statistics: P(X > x) ~ x^{-beta}.
inline double hill_tail_index(std::vector<double> values, std::size_t k) {
    if (values.size() < 3 || k < 2 || k >= values.size())
        throw invalid_parameter("hill_tail_index: need 2 <= k < n");
    std::nth_element(values.begin(), values.end() - static_cast<std::ptrdiff_t>(k + 1),
                     values.end());
    const double threshold = values[values.size() - k - 1];
    if (!(threshold > 0.0)) throw invalid_parameter("hill_tail_index: needs positive tail");
    double s = 0.0;
    for (std::size_t i = values.size() - k; i < values.size(); ++i)
        s += std::log(values[i] / threshold);
    return double(k) / s;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Weighted least squares y ~ intercept + slope * x with weights w (inverse
// variances). The slope standard error comes from the weighted normal
// equations.
inline LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 3)
        throw insufficient_bins("weighted_line_fit: need at least 3 points");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) throw insufficient_bins("weighted_line_fit: degenerate design");
    LineFit fit;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swxx * swy - swx * swxy) / det;
    fit.slope_stderr = std::sqrt(sw / det);
    return fit;
}

} // namespace sletip
