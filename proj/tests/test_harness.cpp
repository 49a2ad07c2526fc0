#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sletip/harness.hpp"

using namespace sletip;

TEST_CASE("generation is bit-identical across thread counts") {
    const auto a = generate(2.0, 1200, SamplerId::reverse_flow, 1e-2, 50.0, 77, 1);
    const auto b = generate(2.0, 1200, SamplerId::reverse_flow, 1e-2, 50.0, 77, 2);
    const auto c = generate(2.0, 1200, SamplerId::reverse_flow, 1e-2, 50.0, 77, 3);
    REQUIRE(a.x == b.x);
    REQUIRE(a.y == b.y);
    REQUIRE(b.x == c.x);
    REQUIRE(b.u == c.u);
}

TEST_CASE("per-row invariants hold") {
    const auto s = generate(4.0, 2000, SamplerId::reverse_flow, 1e-3, 100.0, 5, 0);
    for (std::int64_t i = 0; i < s.n_samples; ++i) {
        REQUIRE(s.y[std::size_t(i)] > 0.0);
        REQUIRE(s.u[std::size_t(i)] ==
                Catch::Approx(s.y[std::size_t(i)] * s.y[std::size_t(i)]).epsilon(1e-12));
        REQUIRE(s.alpha[std::size_t(i)] > 0.0);
        REQUIRE(s.alpha[std::size_t(i)] < pi_const);
        REQUIRE(s.y[std::size_t(i)] <= 2.0 + 5.0 * std::sqrt(s.dt));
    }
}

TEST_CASE("kappa = 0 sets sit at (0, 2)") {
    const auto s = generate(0.0, 1500, SamplerId::reverse_flow, 1e-3, 1e3, 9, 0);
    for (std::int64_t i = 0; i < s.n_samples; ++i) {
        REQUIRE(std::abs(s.y[std::size_t(i)] - 2.0) < 1e-3);
        REQUIRE(s.x[std::size_t(i)] == 0.0);
    }

    // histogram in the (alpha, y) plot chart: a single occupied bin at (pi/2, 2)
    const DensityGrid geom = make_grid(Chart::alpha_im, 0.0, pi_const, 0.0, 2.0, 20, 20);
    const auto h = histogram2d(s, Chart::alpha_im, 20, 20, geom);
    int occupied = 0;
    int oi = -1, oj = -1;
    for (int j = 0; j < h.n2; ++j)
        for (int i = 0; i < h.n1; ++i)
            if (h.at(i, j) > 0.0) {
                ++occupied;
                oi = i;
                oj = j;
            }
    REQUIRE(occupied == 1);
    REQUIRE(std::abs(h.c1_center(oi) - 0.5 * pi_const) <= h.h1());
    REQUIRE(std::abs(h.c2_center(oj) - 2.0) <= h.h2());
    REQUIRE(h.mass() == Catch::Approx(1.0).margin(1e-10));

    // moment of the point mass: E u^-1 = 1/4 up to O(dt)
    const auto rep = estimate_negative_moment(s, 1);
    REQUIRE(rep.estimate == Catch::Approx(0.25).margin(1e-3));
}

TEST_CASE("histograms are normalized and auto-ranged") {
    const auto s = generate(2.0, 20000, SamplerId::reverse_flow, 1e-3, 100.0, 11, 0);
    const auto h = histogram2d(s, Chart::cartesian, 40, 40);
    REQUIRE(h.mass() == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(h.c2_max == Catch::Approx(2.0)); // snapped to the support bound
    const auto ha = histogram2d(s, Chart::angular, 40, 40);
    REQUIRE(ha.c2_max == Catch::Approx(4.0));
    REQUIRE_THROWS_AS(histogram2d(s, Chart::cartesian, 0, 10), invalid_parameter);
    SampleSet tiny = s;
    tiny.n_samples = 10;
    REQUIRE_THROWS_AS(histogram2d(tiny, Chart::cartesian, 10, 10), empty_set);
}

TEST_CASE("I0 profile integrates to one") {
    const auto s = generate(2.0, 30000, SamplerId::reverse_flow, 1e-3, 100.0, 3, 0);
    const auto p0 = estimate_In_profile(s, 0, 32);
    double total = 0.0;
    for (std::size_t i = 0; i < p0.values.size(); ++i)
        if (!p0.missing(i)) total += p0.values[i] * (pi_const / 32.0);
    REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
    // empty bins reported as missing, not zero
    int missing = 0;
    for (std::size_t i = 0; i < p0.values.size(); ++i)
        if (p0.missing(i)) {
            ++missing;
            REQUIRE(std::isnan(p0.values[i]));
        }
    REQUIRE(missing < 8); // only the extreme corners may be empty at this size
}

TEST_CASE("I1 profile matches the closed form at kappa = 2 on the central window") {
    const auto s = generate(2.0, 60000, SamplerId::reverse_flow, 1e-3, 1e3, 17, 0);
    const auto p1 = estimate_In_profile(s, 1, 36);
    int checked = 0;
    for (std::size_t i = 0; i < p1.alphas.size(); ++i) {
        const double a = p1.alphas[i];
        if (a < 0.4 || a > pi_const - 0.4 || p1.missing(i)) continue;
        const double ref = i1_closed_form(a, 2.0);
        REQUIRE(std::abs(p1.values[i] - ref) <=
                std::max(4.0 * p1.standard_errors[i], 0.05 * ref));
        ++checked;
    }
    REQUIRE(checked >= 20);
}

TEST_CASE("negative moment estimate agrees with the profile integral") {
    const auto s = generate(2.0, 50000, SamplerId::reverse_flow, 1e-3, 1e3, 23, 0);
    const auto rep = estimate_negative_moment(s, 1);
    REQUIRE(rep.reference.has_value());
    REQUIRE(*rep.reference == Catch::Approx(1.0 / 3.0));
    REQUIRE(std::abs(rep.estimate - 1.0 / 3.0) <= 4.0 * rep.stderr_);

    // estimator consistency: integral of the I1 profile equals the moment
    const auto p1 = estimate_In_profile(s, 1, 36);
    const auto integral = profile_integral(p1, [](double) { return 1.0; }, 1);
    REQUIRE(std::abs(integral.value - rep.estimate) <=
            3.0 * std::sqrt(integral.stderr_ * integral.stderr_ + rep.stderr_ * rep.stderr_) +
                0.02 * rep.estimate);
}

TEST_CASE("tail index tracks the integrability threshold") {
    // P(U <= u) ~ u^{4/kappa + 1/2}: the Hill index of 1/u estimates that
    // exponent; synthetic Pareto data first, then a real set
    Rng rng(31, 0);
    std::vector<double> pareto(40000);
    const double beta = 1.7;
    for (auto& v : pareto) v = std::pow(1.0 - rng.uniform01(), -1.0 / beta);
    REQUIRE(hill_tail_index(pareto, 2000) == Catch::Approx(beta).epsilon(0.08));

    const auto s = generate(2.0, 30000, SamplerId::reverse_flow, 1e-3, 1e3, 41, 0);
    const auto rep = estimate_negative_moment(s, 1);
    REQUIRE(rep.tail_index == Catch::Approx(4.0 / 2.0 + 0.5).epsilon(0.25));
    REQUIRE_FALSE(rep.near_critical);
}

TEST_CASE("sample mean of x is centred and slopes match the I1 exponent") {
    const auto s2 = generate(2.0, 100000, SamplerId::reverse_flow, 1e-3, 1e3, 57, 0);
    const auto ms = mean_with_stderr(s2.x);
    REQUIRE(std::abs(ms.mean) <= 3.0 * ms.stderr_);

    // log-log slope of I1 near zero: 8/kappa - 2
    const auto p2 = estimate_In_profile(s2, 1, 64);
    const auto fit2 = slope_fit_In(p2, 2.0, {0.05, 0.5});
    REQUIRE(fit2.slope == Catch::Approx(2.0).margin(0.1));

    const auto s4 = generate(4.0, 100000, SamplerId::reverse_flow, 1e-3, 1e3, 58, 0);
    const auto p4 = estimate_In_profile(s4, 1, 64);
    const auto fit4 = slope_fit_In(p4, 4.0, {0.05, 0.5});
    REQUIRE(fit4.slope == Catch::Approx(0.0).margin(0.1));
}

TEST_CASE("slope fit recovers a synthetic power law") {
    InProfile p;
    p.n = 1;
    Rng rng(6, 0);
    for (int i = 0; i < 64; ++i) {
        const double a = (double(i) + 0.5) * pi_const / 64.0;
        p.alphas.push_back(a);
        const double v = 0.7 * std::pow(a, 1.8);
        p.values.push_back(v * (1.0 + 0.01 * rng.normal()));
        p.standard_errors.push_back(0.01 * v);
        p.counts.push_back(100);
    }
    const auto fit = slope_fit_In(p, 2.0, {0.05, 0.6});
    REQUIRE(fit.slope == Catch::Approx(1.8).margin(0.05));
    REQUIRE_THROWS_AS(slope_fit_In(p, 2.0, {0.9, 1.2}), invalid_parameter);
}

TEST_CASE("occupation experiment: degenerate set and reflection symmetry") {
    const auto deg = occupation_experiment(4.0, 0.4, 0.9, 1.0, 1.0, 100.0, 2000, 1e-3, 3, 0,
                                           50.0);
    REQUIRE(deg.estimate == 0.0);
    REQUIRE(deg.reference == 0.0);

    const auto left = occupation_experiment(4.0, 0.5, 1.0, 0.5, 1.5, 1e4, 4000, 1e-3, 8, 0,
                                            1e3);
    const auto right = occupation_experiment(4.0, pi_const - 1.0, pi_const - 0.5, 0.5, 1.5, 1e4,
                                             4000, 1e-3, 9, 0, 1e3);
    REQUIRE(std::abs(left.estimate - right.estimate) <=
            4.0 * std::sqrt(left.stderr_ * left.stderr_ + right.stderr_ * right.stderr_) +
                0.02);
    REQUIRE(left.reference == Catch::Approx(right.reference).epsilon(1e-9));
}

TEST_CASE("KS symmetry of alpha about pi/2") {
    const auto s = generate(2.0, 20000, SamplerId::reverse_flow, 1e-3, 100.0, 29, 0);
    std::vector<double> reflected(s.alpha.size());
    for (std::size_t i = 0; i < s.alpha.size(); ++i) reflected[i] = pi_const - s.alpha[i];
    const auto ks = ks_two_sample(s.alpha, reflected);
    REQUIRE(ks.p_value > 1e-3);

    // a deliberately shifted sample fails
    std::vector<double> shifted = s.alpha;
    for (auto& v : shifted) v += 0.05;
    const auto bad = ks_two_sample(s.alpha, shifted);
    REQUIRE(bad.p_value < 1e-3);
}

TEST_CASE("sample csv round trip is exact") {
    const auto s = generate(2.0, 1500, SamplerId::reverse_flow, 1e-2, 50.0, 19, 0);
    std::ostringstream os;
    write_samples_csv(s, os);
    std::istringstream is(os.str());
    const auto t = read_samples_csv(is);
    REQUIRE(t.kappa == s.kappa);
    REQUIRE(t.dt == s.dt);
    REQUIRE(t.t_horizon == s.t_horizon);
    REQUIRE(t.master_seed == s.master_seed);
    REQUIRE(t.sampler == s.sampler);
    REQUIRE(t.x == s.x);
    REQUIRE(t.y == s.y);
    REQUIRE(t.alpha == s.alpha);
    REQUIRE(t.u == s.u);
}
