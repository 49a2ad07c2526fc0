#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "sletip/analytics.hpp"
#include "sletip/diffusion.hpp"
#include "sletip/errors.hpp"
#include "sletip/grid.hpp"
#include "sletip/loewner.hpp"
#include "sletip/samples.hpp"
#include "sletip/stats.hpp"

namespace sletip {

// Draw n_samples tips, one independent RNG stream per sample index, spread
// over a thread pool. The result is bit-identical for any worker count: each
// sample is a pure function of (master_seed, stream_id) and is written to its
// own slot. For the diffusion sampler, t_horizon is the burn-in time.
inline SampleSet generate(double kappa, std::int64_t n_samples, SamplerId sampler, double dt,
                          double t_horizon, std::uint64_t master_seed, int threads = 0) {
    if (n_samples < 1) throw invalid_parameter("generate: n_samples must be >= 1");
    SampleSet set;
    set.kappa = kappa;
    set.n_samples = n_samples;
    set.master_seed = master_seed;
    set.dt = dt;
    set.t_horizon = t_horizon;
    set.sampler = sampler;
    set.x.resize(std::size_t(n_samples));
    set.y.resize(std::size_t(n_samples));
    set.alpha.resize(std::size_t(n_samples));
    set.u.resize(std::size_t(n_samples));

    const double support_slack = 2.0 + 5.0 * std::sqrt(dt);
    auto worker = [&](std::int64_t lo, std::int64_t hi, std::exception_ptr& err) {
        try {
            for (std::int64_t i = lo; i < hi; ++i) {
                const TipSample s =
                    sampler == SamplerId::reverse_flow
                        ? tip_sample(kappa, t_horizon, dt, master_seed, std::uint64_t(i))
                        : stationary_sample(kappa, t_horizon, dt, master_seed, std::uint64_t(i));
                if (!(s.y > 0.0) || s.y > support_slack)
                    throw std::logic_error("generate: sample violated the support bound");
                set.x[std::size_t(i)] = s.x;
                set.y[std::size_t(i)] = s.y;
                set.alpha[std::size_t(i)] = s.alpha();
                set.u[std::size_t(i)] = s.u();
            }
        } catch (...) {
            err = std::current_exception();
        }
    };

    int nt = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    if (nt < 1) nt = 1;
    nt = int(std::min<std::int64_t>(nt, n_samples));
    if (nt == 1) {
        std::exception_ptr err;
        worker(0, n_samples, err);
        if (err) std::rethrow_exception(err);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs;
        errs.resize(std::size_t(nt));
        const std::int64_t chunk = (n_samples + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const std::int64_t lo = t * chunk;
            const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n_samples);
            pool.emplace_back(worker, lo, hi, std::ref(errs[std::size_t(t)]));
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    return set;
}

namespace detail {

// Coordinate accessors and the hard support bound (if any) per chart.
inline const std::vector<double>& chart_c1(const SampleSet& s, Chart c) {
    switch (c) {
        case Chart::cartesian:
        case Chart::log_im: return s.x;
        case Chart::angular:
        case Chart::alpha_im: return s.alpha;
    }
    return s.x;
}

inline std::vector<double> chart_c2(const SampleSet& s, Chart c) {
    switch (c) {
        case Chart::cartesian: return s.y;
        case Chart::log_im: {
            std::vector<double> z(s.y.size());
            for (std::size_t i = 0; i < s.y.size(); ++i) z[i] = std::log(s.y[i]);
            return z;
        }
        case Chart::angular: return s.u;
        case Chart::alpha_im: return s.y;
    }
    return s.y;
}

inline std::optional<double> chart_c2_support_bound(Chart c) {
    switch (c) {
        case Chart::cartesian:
        case Chart::alpha_im: return 2.0;
        case Chart::log_im: return std::log(2.0);
        case Chart::angular: return 4.0;
    }
    return std::nullopt;
}

} // namespace detail

// Normalized 2-d histogram of a sample set in the requested chart. Samples
// overshooting the support bound by discretization slack are clamped into the
// top bin; anything else outside the box is dropped before normalization.
inline DensityGrid histogram2d(const SampleSet& set, Chart chart, int n1, int n2,
                               std::optional<DensityGrid> geometry = std::nullopt) {
    if (set.n_samples < 1000) throw empty_set("histogram2d: need at least 1e3 samples");
    const auto& c1 = detail::chart_c1(set, chart);
    const auto c2 = detail::chart_c2(set, chart);

    DensityGrid g;
    if (geometry) {
        require_same_geometry(*geometry, *geometry);
        if (geometry->chart != chart) throw chart_mismatch("histogram2d: geometry chart differs");
        g = make_grid(chart, geometry->c1_min, geometry->c1_max, geometry->c2_min,
                      geometry->c2_max, geometry->n1, geometry->n2);
    } else {
        double lo1 = c1[0], hi1 = c1[0], lo2 = c2[0], hi2 = c2[0];
        for (std::size_t i = 0; i < c1.size(); ++i) {
            lo1 = std::min(lo1, c1[i]);
            hi1 = std::max(hi1, c1[i]);
            lo2 = std::min(lo2, c2[i]);
            hi2 = std::max(hi2, c2[i]);
        }
        // snap the top of the second coordinate to the support bound when the
        // data reaches it (Euler overshoot is at most ~5 sqrt(dt) in y)
        if (const auto bound = detail::chart_c2_support_bound(chart)) {
            if (hi2 > *bound - 0.25 && hi2 < *bound + 0.5) hi2 = *bound;
        }
        const double pad1 = (hi1 - lo1) * 1e-9 + 1e-12;
        g = make_grid(chart, lo1 - pad1, hi1 + pad1, lo2, hi2 + (hi2 > lo2 ? 0.0 : 1e-12), n1,
                      n2);
    }

    const auto bound = detail::chart_c2_support_bound(chart);
    const bool clamp_top = bound && std::abs(g.c2_max - *bound) < 1e-9;
    const double slack = 5.0 * std::sqrt(std::max(set.dt, 1e-12)) *
                         (chart == Chart::angular ? 4.0 : 1.0);

    for (std::size_t i = 0; i < c1.size(); ++i) {
        double a = c1[i], b = c2[i];
        if (clamp_top && b > g.c2_max && b <= g.c2_max + slack) b = g.c2_max;
        if (a < g.c1_min || a >= g.c1_max || b < g.c2_min || b > g.c2_max) continue;
        int i1 = int((a - g.c1_min) / g.h1());
        int i2 = int((b - g.c2_min) / g.h2());
        i1 = std::min(i1, g.n1 - 1);
        i2 = std::min(i2, g.n2 - 1);
        g.at(i1, i2) += 1.0;
    }
    if (g.mass() <= 0.0) throw empty_set("histogram2d: no sample landed inside the grid");
    g.normalize();
    return g;
}

// Binned ratio estimator of I_n(alpha) = int u^{-n} phi(alpha, u) du on
// uniform bins over (0, pi):
//   I_n(bin) ~= sum_{i in bin} u_i^{-n} / (N * bin_width),
// with the delete-1 jackknife standard error of the per-sample contribution.
inline InProfile estimate_In_profile(const SampleSet& set, int n, int n_alpha_bins) {
    if (set.n_samples < 1) throw empty_set("estimate_In_profile: empty sample set");
    if (n_alpha_bins < 4) throw invalid_parameter("estimate_In_profile: need >= 4 bins");
    const double width = pi_const / double(n_alpha_bins);
    const double big_n = double(set.n_samples);

    std::vector<double> s1(std::size_t(n_alpha_bins), 0.0);
    std::vector<double> s2(std::size_t(n_alpha_bins), 0.0);
    std::vector<std::int64_t> cnt(std::size_t(n_alpha_bins), 0);
    for (std::int64_t i = 0; i < set.n_samples; ++i) {
        const double a = set.alpha[std::size_t(i)];
        int b = int(a / width);
        if (b < 0 || b >= n_alpha_bins) continue; // alpha in (0, pi) by construction
        const double v = std::pow(set.u[std::size_t(i)], -double(n));
        s1[std::size_t(b)] += v;
        s2[std::size_t(b)] += v * v;
        ++cnt[std::size_t(b)];
    }

    InProfile p;
    p.n = n;
    p.alphas.resize(std::size_t(n_alpha_bins));
    p.values.resize(std::size_t(n_alpha_bins));
    p.standard_errors.resize(std::size_t(n_alpha_bins));
    p.counts = cnt;
    for (int b = 0; b < n_alpha_bins; ++b) {
        p.alphas[std::size_t(b)] = (double(b) + 0.5) * width;
        if (cnt[std::size_t(b)] == 0) {
            p.values[std::size_t(b)] = std::numeric_limits<double>::quiet_NaN();
            p.standard_errors[std::size_t(b)] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double mean_eta = s1[std::size_t(b)] / big_n; // mean of u^{-n} 1(bin)
        const double mean_eta2 = s2[std::size_t(b)] / big_n;
        const double var_eta = std::max(0.0, mean_eta2 - mean_eta * mean_eta);
        p.values[std::size_t(b)] = mean_eta / width;
        p.standard_errors[std::size_t(b)] = std::sqrt(var_eta / big_n) / width;
    }
    return p;
}

// Monte Carlo estimate of E (Im)^{-2n} = E u^{-n} with tail diagnostics.
struct MomentReport {
    int order = 2;           // negative moment order 2n
    double estimate = 0.0;
    double stderr_ = 0.0;    // jackknife; widened when the tail index says Var = inf
    double truncation_floor = 0.0;
    std::optional<double> reference;
    std::optional<double> z_score;
    double tail_index = 0.0; // Hill index beta of 1/u; E u^{-n} finite iff beta > n
    bool near_critical = false;
    bool phase_finite = true;
};

inline MomentReport estimate_negative_moment(const SampleSet& set, int n) {
    if (set.n_samples < 2) throw empty_set("estimate_negative_moment: too few samples");
    if (n < 1) throw invalid_parameter("estimate_negative_moment: n must be >= 1");
    MomentReport rep;
    rep.order = 2 * n;
    const MomentPhase phase{n};
    rep.phase_finite = phase.is_finite(set.kappa);
    rep.near_critical = set.kappa > phase.kappa_critical() - 0.5;

    std::vector<double> inv_u(set.u.size());
    for (std::size_t i = 0; i < set.u.size(); ++i) inv_u[i] = 1.0 / set.u[i];
    const std::size_t k_tail = std::clamp<std::size_t>(
        std::size_t(std::pow(double(set.n_samples), 0.6)), 25, inv_u.size() / 5);
    rep.tail_index = hill_tail_index(inv_u, k_tail);

    std::vector<double> vals;
    vals.reserve(inv_u.size());
    if (rep.near_critical) {
        // truncate the few most extreme contributions so the report stays
        // finite-variance enough to be legible; the floor is part of the report
        std::vector<double> u_sorted = set.u;
        const std::size_t m = std::max<std::size_t>(1, std::size_t(std::pow(double(set.n_samples), 0.25)));
        std::nth_element(u_sorted.begin(), u_sorted.begin() + std::ptrdiff_t(m - 1),
                         u_sorted.end());
        rep.truncation_floor = u_sorted[m - 1];
        for (std::size_t i = 0; i < set.u.size(); ++i)
            if (set.u[i] > rep.truncation_floor) vals.push_back(std::pow(set.u[i], -double(n)));
    } else {
        for (std::size_t i = 0; i < set.u.size(); ++i)
            vals.push_back(std::pow(set.u[i], -double(n)));
    }
    const auto ms = mean_with_stderr(vals);
    rep.estimate = ms.mean;
    rep.stderr_ = ms.stderr_;
    if (rep.tail_index <= 2.0 * double(n)) rep.stderr_ *= 3.0; // infinite-variance widening

    if (rep.phase_finite) {
        if (n == 1) rep.reference = moment_neg2(set.kappa).value;
        if (n == 2) rep.reference = moment_neg4(set.kappa).value;
        if (rep.reference && rep.stderr_ > 0.0)
            rep.z_score = (rep.estimate - *rep.reference) / rep.stderr_;
    }
    return rep;
}

// Expected occupation time of a box in the (alpha, u) chart, estimated from
// the law of gamma(1) alone: by scaling, gamma(t) lies in the box exactly for
// t in [u_lo/u, u_hi/u] (when alpha is in range), so the time integral of the
// indicator is the measure of that interval clipped to [0, t_max].
struct OccupationReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double reference = 0.0;
    double missing_mass = 0.0;        // estimated occupation beyond t_max
    double fraction_truncated = 0.0;  // paths whose window was clipped by t_max
    std::int64_t n_paths = 0;
};

inline OccupationReport occupation_experiment(double kappa, double alpha_lo, double alpha_hi,
                                              double u_lo, double u_hi, double t_max,
                                              std::int64_t n_paths, double dt,
                                              std::uint64_t master_seed, int threads = 0,
                                              double t_horizon = 1e4) {
    if (!(t_max > 0.0)) throw invalid_parameter("occupation_experiment: t_max must be > 0");
    const double reference = expected_occupation(alpha_lo, alpha_hi, u_lo, u_hi, kappa);

    const SampleSet set =
        generate(kappa, n_paths, SamplerId::reverse_flow, dt, t_horizon, master_seed, threads);
    std::vector<double> contrib(std::size_t(n_paths), 0.0);
    double missing = 0.0;
    std::int64_t truncated = 0;
    for (std::int64_t i = 0; i < n_paths; ++i) {
        const double a = set.alpha[std::size_t(i)];
        if (a < alpha_lo || a > alpha_hi) continue;
        const double u = set.u[std::size_t(i)];
        const double t_lo = u_lo / u;
        const double t_hi = u_hi / u;
        contrib[std::size_t(i)] = std::max(0.0, std::min(t_hi, t_max) - std::min(t_lo, t_max));
        if (t_hi > t_max) {
            missing += t_hi - std::max(t_lo, t_max);
            ++truncated;
        }
    }
    OccupationReport rep;
    const auto ms = mean_with_stderr(contrib);
    rep.estimate = ms.mean;
    rep.stderr_ = ms.stderr_;
    rep.reference = reference;
    rep.missing_mass = missing / double(n_paths);
    rep.fraction_truncated = double(truncated) / double(n_paths);
    rep.n_paths = n_paths;
    if (rep.missing_mass > 0.05 * std::max(rep.estimate, 1e-12))
        throw t_max_insufficient("occupation_experiment: scaled set still carries mass at t_max");
    return rep;
}

// Weighted log-log fit of I_n(alpha) ~ alpha^slope over an alpha window near
// zero; the reference exponent is 8/kappa - 2n.
struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    int bins_used = 0;
};

inline SlopeFit slope_fit_In(const InProfile& profile, double kappa,
                             std::pair<double, double> window) {
    (void)kappa;
    const auto [lo, hi] = window;
    if (!(0.0 < lo && lo < hi && hi <= pi_const / 4.0 + 1e-12))
        throw invalid_parameter("slope_fit_In: window must lie inside (0, pi/4]");
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < profile.alphas.size(); ++i) {
        const double a = profile.alphas[i];
        if (a < lo || a > hi) continue;
        if (profile.missing(i) || !(profile.values[i] > 0.0)) continue;
        const double rel = profile.standard_errors[i] / profile.values[i];
        if (!std::isfinite(rel) || rel <= 0.0) continue;
        xs.push_back(std::log(a));
        ys.push_back(std::log(profile.values[i]));
        ws.push_back(1.0 / (rel * rel));
    }
    if (xs.size() < 3) throw insufficient_bins("slope_fit_In: fewer than 3 usable bins");
    const auto fit = weighted_line_fit(xs, ys, ws);
    return {fit.slope, fit.slope_stderr, int(xs.size())};
}

} // namespace sletip
