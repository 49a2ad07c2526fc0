#include <catch2/catch_amalgamated.hpp>

#include "sletip/harness.hpp"

using namespace sletip;

// Cross-validation of the two independent samplers of the tip law: the
// rescaled reverse flow integrated in half-plane coordinates, and the
// autonomous log-chart diffusion run past burn-in. Their x and Im marginals
// must be KS-indistinguishable.

TEST_CASE("reverse-flow and diffusion samplers agree in law") {
    const std::int64_t n = 100000;
    const double kappa = 2.0;
    const auto flow = generate(kappa, n, SamplerId::reverse_flow, 1e-3, 1e4, 101, 0);
    const auto diff = generate(kappa, n, SamplerId::diffusion, 1e-3, 40.0, 202, 0);

    const auto ks_y = ks_two_sample(flow.y, diff.y);
    const auto ks_x = ks_two_sample(flow.x, diff.x);
    INFO("KS(y) = " << ks_y.distance << ", KS(x) = " << ks_x.distance);
    REQUIRE(ks_y.distance < 0.02);
    REQUIRE(ks_x.distance < 0.02);

    // both respect the support bound with the discretization slack
    for (double v : diff.y) REQUIRE(v <= 2.0 + 5.0 * std::sqrt(1e-3));
}

TEST_CASE("kappa = 0 degenerate law agrees between samplers") {
    const auto flow = generate(0.0, 1000, SamplerId::reverse_flow, 1e-3, 1e3, 1, 0);
    const auto diff = generate(0.0, 1000, SamplerId::diffusion, 1e-3, 40.0, 2, 0);
    for (std::int64_t i = 0; i < 1000; ++i) {
        REQUIRE(std::abs(flow.y[std::size_t(i)] - 2.0) < 2e-3);
        REQUIRE(std::abs(diff.y[std::size_t(i)] - 2.0) < 2e-3);
    }
}
