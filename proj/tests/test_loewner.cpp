#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "sletip/loewner.hpp"

using namespace sletip;

// Oracle: for the zero driver the flows have closed forms
//   g_t(z) = sqrt(z^2 + 4t),  h_t(z) = sqrt(z^2 - 4t)
// with the branch in the upper half-plane.

TEST_CASE("zero-driver forward flow matches sqrt(z^2 + 4t)") {
    const double dt = 1e-4;
    const auto d = sample_driver(0.0, dt, 10000, 0, 0); // horizon 1
    const auto r = forward_flow({0.0, 3.0}, d, 1.0);
    REQUIRE_FALSE(r.swallowed);
    const auto exact = zero_driver_forward({0.0, 3.0}, 1.0); // = i sqrt(5)
    REQUIRE(exact.real() == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(exact.imag() == Catch::Approx(std::sqrt(5.0)));
    REQUIRE(std::abs(std::complex<double>(r.point.x, r.point.y) - exact) < 10.0 * dt);

    // off-axis start, same tolerance
    const auto r2 = forward_flow({1.5, 2.0}, d, 1.0);
    const auto exact2 = zero_driver_forward({1.5, 2.0}, 1.0);
    REQUIRE(std::abs(std::complex<double>(r2.point.x, r2.point.y) - exact2) < 10.0 * dt);
}

TEST_CASE("zero-driver reverse flow matches sqrt(z^2 - 4t)") {
    const double dt = 1e-4;
    const auto d = sample_driver(0.0, dt, 10000, 0, 0);
    const auto h = reverse_flow({0.0, 1.0}, d, 1.0);
    const auto exact = zero_driver_reverse({0.0, 1.0}, 1.0); // = i sqrt(5)
    REQUIRE(std::abs(std::complex<double>(h.x, h.y) - exact) < 10.0 * dt);

    const auto h2 = reverse_flow({-0.7, 0.4}, d, 1.0);
    const auto exact2 = zero_driver_reverse({-0.7, 0.4}, 1.0);
    REQUIRE(std::abs(std::complex<double>(h2.x, h2.y) - exact2) < 10.0 * dt);
}

TEST_CASE("t = 0 returns the initial point") {
    const auto d = sample_driver(2.0, 1e-3, 100, 11, 0);
    const auto f = forward_flow({0.3, 1.2}, d, 0.0);
    REQUIRE(f.point.x == 0.3);
    REQUIRE(f.point.y == 1.2);
    REQUIRE_FALSE(f.swallowed);
    const auto h = reverse_flow({0.3, 1.2}, d, 0.0);
    REQUIRE(h.x == 0.3);
    REQUIRE(h.y == 1.2);
}

TEST_CASE("forward flow swallows i at t near 1/4") {
    // g_t(i) = sqrt(4t - 1) hits the (zero) driver at t = 1/4
    const double dt = 1e-4;
    const auto d = sample_driver(0.0, dt, 10000, 0, 0);
    const auto r = forward_flow({0.0, 1.0}, d, 1.0);
    REQUIRE(r.swallowed);
    REQUIRE(r.swallow_time.has_value());
    REQUIRE(*r.swallow_time == Catch::Approx(0.25).margin(0.005));
}

TEST_CASE("horizon errors") {
    const auto d = sample_driver(2.0, 1e-2, 10, 3, 0);
    REQUIRE_THROWS_AS(forward_flow({0.0, 1.0}, d, 0.2), horizon_exceeded);
    REQUIRE_THROWS_AS(reverse_flow({0.0, 1.0}, d, 0.2), horizon_exceeded);
    REQUIRE_THROWS_AS(reverse_flow({0.0, -1.0}, d, 0.05), invalid_parameter);
}

TEST_CASE("Im h is non-decreasing along the reverse flow") {
    const auto d = sample_driver(4.0, 1e-3, 2000, 17, 5);
    double prev = 0.5;
    for (int k = 1; k <= 20; ++k) {
        const auto h = reverse_flow({0.2, 0.5}, d, 0.1 * k);
        REQUIRE(h.y >= prev - 1e-15);
        prev = h.y;
    }
}

TEST_CASE("scaling property at c = 2, z = i, t = 1") {
    // (1/c) h_{c^2 t}(c z) solves the reverse flow driven by (1/c) w_{c^2 s}
    const double c = 2.0;
    const double dt = 1e-4;
    const int n = 40000; // horizon c^2 t = 4
    const auto d = sample_driver(2.0, dt, n, 321, 9);

    DrivingFunction scaled;
    scaled.kappa = d.kappa;
    scaled.dt = d.dt / (c * c);
    scaled.seed = d.seed;
    scaled.stream_id = d.stream_id;
    scaled.values.resize(d.values.size());
    for (std::size_t k = 0; k < d.values.size(); ++k) scaled.values[k] = d.values[k] / c;

    const auto big = reverse_flow({0.0, c}, d, c * c * 1.0);
    const auto small = reverse_flow({0.0, 1.0}, scaled, 1.0);
    REQUIRE(small.x == Catch::Approx(big.x / c).margin(5e-3));
    REQUIRE(small.y == Catch::Approx(big.y / c).margin(5e-3));
}

TEST_CASE("identical inputs give bit-identical flow results") {
    const auto d1 = sample_driver(3.0, 1e-3, 3000, 77, 1);
    const auto d2 = sample_driver(3.0, 1e-3, 3000, 77, 1);
    const auto a = reverse_flow({0.1, 0.9}, d1, 3.0);
    const auto b = reverse_flow({0.1, 0.9}, d2, 3.0);
    REQUIRE(a.x == b.x);
    REQUIRE(a.y == b.y);
}

TEST_CASE("rescaled reverse flow approaches 2i for the zero driver") {
    // (1/sqrt(t)) Im h_t(i) -> 2; at t = 1e4 the remaining gap is < 1e-4
    const auto s = tip_sample(0.0, 1e4, 1e-4, 0, 0);
    REQUIRE(std::abs(s.y - 2.0) < 1e-4);
    REQUIRE(s.x == 0.0);
}

TEST_CASE("tip sample at kappa = 0 sits at (0, 2) within dt") {
    const double dt = 1e-3;
    const auto s = tip_sample(0.0, 1e4, dt, 9, 4);
    REQUIRE(std::abs(s.y - 2.0) < dt);
    REQUIRE(s.x == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("tip samples are strictly inside the half-plane and below the cap") {
    const double dt = 1e-3;
    for (int i = 0; i < 50; ++i) {
        const auto s = tip_sample(6.0, 1e3, dt, 2025, std::uint64_t(i));
        REQUIRE(s.y > 0.0);
        REQUIRE(s.y <= 2.0 + 5.0 * std::sqrt(dt));
    }
}

TEST_CASE("tip sampling is deterministic per (seed, stream)") {
    const auto a = tip_sample(2.0, 100.0, 1e-3, 55, 123);
    const auto b = tip_sample(2.0, 100.0, 1e-3, 55, 123);
    REQUIRE(a.x == b.x);
    REQUIRE(a.y == b.y);
}

TEST_CASE("tip sample validates its arguments") {
    REQUIRE_THROWS_AS(tip_sample(2.0, 0.5, 1e-3, 0, 0), invalid_parameter);
    REQUIRE_THROWS_AS(tip_sample(2.0, 10.0, 0.0, 0, 0), invalid_parameter);
    REQUIRE_THROWS_AS(tip_sample(-1.0, 10.0, 1e-3, 0, 0), invalid_parameter);
}
