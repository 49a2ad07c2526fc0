#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sletip/rng.hpp"
#include "sletip/spline.hpp"

using namespace sletip;

TEST_CASE("smoothing spline reproduces a cubic exactly at tiny penalty") {
    std::vector<double> x, y, se;
    for (int i = 0; i <= 20; ++i) {
        const double t = double(i) / 20.0;
        x.push_back(t);
        y.push_back(1.0 + t + t * t); // quadratic: zero fourth derivative
        se.push_back(1.0);
    }
    const auto sp = fit_smoothing_spline(x, y, se, 1e-12);
    // the natural end conditions bias the derivatives near the boundary, so
    // check well inside
    for (std::size_t i = 5; i + 5 < x.size(); ++i) {
        REQUIRE(sp.value[i] == Catch::Approx(y[i]).margin(1e-6));
        REQUIRE(sp.d1[i] == Catch::Approx(1.0 + 2.0 * x[i]).margin(3e-3));
        REQUIRE(sp.d2[i] == Catch::Approx(2.0).margin(5e-2));
    }
}

TEST_CASE("GCV smoothing recovers a smooth signal from noise") {
    Rng rng(11, 0);
    std::vector<double> x, y, se;
    const int m = 60;
    for (int i = 0; i < m; ++i) {
        const double t = 0.2 + 2.7 * double(i) / double(m - 1);
        const double clean = std::sin(t) * std::sin(t);
        x.push_back(t);
        se.push_back(0.02);
        y.push_back(clean + 0.02 * rng.normal());
    }
    const auto sp = fit_smoothing_spline(x, y, se);
    double err = 0.0, raw = 0.0;
    for (int i = 5; i < m - 5; ++i) {
        const double clean = std::sin(x[std::size_t(i)]) * std::sin(x[std::size_t(i)]);
        err += std::abs(sp.value[std::size_t(i)] - clean);
        raw += std::abs(y[std::size_t(i)] - clean);
    }
    REQUIRE(err < raw); // the fit is closer to the truth than the data
    // derivative accuracy in the interior
    for (int i = 10; i < m - 10; i += 7) {
        const double d_clean = 2.0 * std::sin(x[std::size_t(i)]) * std::cos(x[std::size_t(i)]);
        REQUIRE(sp.d1[std::size_t(i)] == Catch::Approx(d_clean).margin(0.15));
    }
}

TEST_CASE("smoother matrices reproduce the fitted values") {
    Rng rng(4, 2);
    std::vector<double> x, y, se;
    for (int i = 0; i < 24; ++i) {
        x.push_back(0.1 * double(i));
        y.push_back(rng.normal());
        se.push_back(0.5);
    }
    const auto sp = fit_smoothing_spline(x, y, se, 1e-3);
    for (std::size_t j = 0; j < x.size(); j += 5) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += sp.s0(long(j), long(i)) * y[i];
        REQUIRE(acc == Catch::Approx(sp.value[j]).margin(1e-10));
    }
}

TEST_CASE("spline input validation") {
    std::vector<double> x = {0, 1, 2}, y = {0, 1, 2}, se = {1, 1, 1};
    REQUIRE_THROWS_AS(fit_smoothing_spline(x, y, se), insufficient_bins);
}
