#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "sletip/grid.hpp"
#include "sletip/rng.hpp"

using namespace sletip;

namespace {

DensityGrid gaussian_cartesian() {
    DensityGrid g = make_grid(Chart::cartesian, -3.0, 3.0, 0.2, 1.8, 224, 224);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            const double x = g.c1_center(i), y = g.c2_center(j);
            g.at(i, j) = std::exp(-x * x - 4.0 * (y - 1.0) * (y - 1.0));
        }
    g.normalize();
    return g;
}

} // namespace

TEST_CASE("text serialization round-trips bit-for-bit") {
    DensityGrid g = make_grid(Chart::log_im, -1.5, 2.5, -3.0, 0.25, 7, 5);
    Rng rng(21, 0);
    for (auto& v : g.values) v = rng.uniform01() * 1e-3;
    std::ostringstream os;
    write_grid(g, os);
    std::istringstream is(os.str());
    const DensityGrid h = read_grid(is);
    REQUIRE(h.chart == g.chart);
    REQUIRE(h.n1 == g.n1);
    REQUIRE(h.n2 == g.n2);
    REQUIRE(h.c1_min == g.c1_min);
    REQUIRE(h.c2_max == g.c2_max);
    REQUIRE(h.values == g.values);

    // and the serialized text itself is stable
    std::ostringstream os2;
    write_grid(h, os2);
    REQUIRE(os.str() == os2.str());
}

TEST_CASE("grid parser reports malformed headers") {
    std::istringstream bad1("nx=3\n");
    REQUIRE_THROWS_AS(read_grid(bad1), io_error);
    std::istringstream bad2("chart=log\nnx=2\nny=2\nranges=0 1 0\n1 1 1 1\n");
    REQUIRE_THROWS_AS(read_grid(bad2), io_error);
    std::istringstream bad3("chart=log\nnx=2\nny=2\nranges=0 1 0 1\n1 1 1\n");
    REQUIRE_THROWS_AS(read_grid(bad3), io_error);
}

TEST_CASE("csv export carries chart-appropriate column names") {
    DensityGrid g = make_grid(Chart::angular, 0.1, 3.0, 0.1, 3.9, 3, 3);
    g.values.assign(9, 1.0);
    std::ostringstream os;
    write_grid_csv(g, os);
    REQUIRE(os.str().rfind("alpha,u,value\n", 0) == 0);
}

TEST_CASE("l1 distance and aggregation") {
    DensityGrid a = make_grid(Chart::cartesian, 0, 1, 0, 1, 4, 4);
    DensityGrid b = a;
    a.values.assign(16, 1.0);
    b.values.assign(16, 1.0);
    b.values[5] = 3.0;
    REQUIRE(l1_distance(a, b) == Catch::Approx(2.0 / 16.0));
    DensityGrid c = make_grid(Chart::cartesian, 0, 1, 0, 1, 8, 8);
    REQUIRE_THROWS_AS(l1_distance(a, c), grid_mismatch);

    const DensityGrid agg = aggregate(b, 2);
    REQUIRE(agg.n1 == 2);
    REQUIRE(agg.mass() == Catch::Approx(b.mass()));
}

TEST_CASE("cartesian -> log -> cartesian round trip preserves the density") {
    const DensityGrid psi = gaussian_cartesian();
    const DensityGrid logd = convert_chart(psi, Chart::log_im);
    // return trip on the exact source geometry
    const DensityGrid back = convert_chart(logd, psi);
    REQUIRE(l1_distance(psi, back) < 1e-3);
}

TEST_CASE("cartesian -> angular -> cartesian round trip preserves the density") {
    const DensityGrid psi = gaussian_cartesian();
    const DensityGrid ang = convert_chart(psi, Chart::angular);
    const DensityGrid back = convert_chart(ang, psi);
    REQUIRE(l1_distance(psi, back) < 2e-3);
}

TEST_CASE("a point mass at (0, 2) maps to (pi/2, 4)") {
    DensityGrid psi = make_grid(Chart::cartesian, -1.0, 1.0, 1.0, 2.2, 40, 40);
    // cell whose center is closest to (0, 2)
    int bi = 0, bj = 0;
    double best = 1e300;
    for (int j = 0; j < psi.n2; ++j)
        for (int i = 0; i < psi.n1; ++i) {
            const double d = std::abs(psi.c1_center(i)) + std::abs(psi.c2_center(j) - 2.0);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    psi.at(bi, bj) = 1.0;
    psi.normalize();
    const DensityGrid geom = make_grid(Chart::angular, 1.0, 2.2, 3.0, 4.6, 40, 40);
    const DensityGrid phi = convert_chart(psi, geom);
    // arg max of the converted density sits at (pi/2, 4) within a cell
    int mi = 0, mj = 0;
    double vmax = -1.0;
    for (int j = 0; j < phi.n2; ++j)
        for (int i = 0; i < phi.n1; ++i)
            if (phi.at(i, j) > vmax) {
                vmax = phi.at(i, j);
                mi = i;
                mj = j;
            }
    REQUIRE(std::abs(phi.c1_center(mi) - 1.5707963267948966) <= 2.0 * phi.h1());
    REQUIRE(std::abs(phi.c2_center(mj) - 4.0) <= 2.0 * phi.h2());
}

TEST_CASE("uniform angular density maps to psi proportional to 2y^2/(x^2+y^2)") {
    const double pi = 3.14159265358979323846;
    DensityGrid phi = make_grid(Chart::angular, 0.5, pi - 0.5, 0.5, 3.5, 80, 80);
    phi.values.assign(phi.values.size(), 1.0);
    phi.normalize();
    const DensityGrid geom = make_grid(Chart::cartesian, -3.6, 3.6, 0.6, 1.9, 72, 72);
    const DensityGrid psi = convert_chart(phi, geom);
    // psi * (x^2+y^2) / (2 y^2) is constant at points strictly inside the
    // image of the source box (the image boundary cells are smeared by the
    // resampling)
    double ratio_min = 1e300, ratio_max = 0.0;
    for (int j = 0; j < psi.n2; ++j)
        for (int i = 0; i < psi.n1; ++i) {
            const double x = psi.c1_center(i), y = psi.c2_center(j);
            const double a = std::atan2(y, x);
            const double u = y * y;
            if (a < 0.55 || a > pi - 0.55 || u < 0.7 || u > 3.2) continue;
            const double v = psi.at(i, j);
            REQUIRE(v > 0.0);
            const double r = v * (x * x + y * y) / (2.0 * y * y);
            ratio_min = std::min(ratio_min, r);
            ratio_max = std::max(ratio_max, r);
        }
    REQUIRE(ratio_max / ratio_min == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("conversion rejects a target box that misses the support") {
    const DensityGrid psi = gaussian_cartesian();
    const DensityGrid geom = make_grid(Chart::angular, 0.01, 0.2, 0.01, 0.05, 16, 16);
    REQUIRE_THROWS_AS(convert_chart(psi, geom), target_range_uncovered);
}
