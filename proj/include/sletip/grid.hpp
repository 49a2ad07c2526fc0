#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sletip/charts.hpp"
#include "sletip/errors.hpp"

namespace sletip {

// A density on a rectangular grid of cell centers in one chart. Values are
// stored row-major, index (i, j) = j * n1 + i with i running over the first
// coordinate.
struct DensityGrid {
    Chart chart = Chart::cartesian;
    double c1_min = 0.0, c1_max = 1.0;
    double c2_min = 0.0, c2_max = 1.0;
    int n1 = 0, n2 = 0;
    std::vector<double> values;

    double h1() const { return (c1_max - c1_min) / double(n1); }
    double h2() const { return (c2_max - c2_min) / double(n2); }
    double cell_measure() const { return h1() * h2(); }
    double c1_center(int i) const { return c1_min + (double(i) + 0.5) * h1(); }
    double c2_center(int j) const { return c2_min + (double(j) + 0.5) * h2(); }

    double& at(int i, int j) { return values[std::size_t(j) * std::size_t(n1) + std::size_t(i)]; }
    double at(int i, int j) const {
        return values[std::size_t(j) * std::size_t(n1) + std::size_t(i)];
    }

    double mass() const {
        double s = 0.0, comp = 0.0;
        for (double v : values) {
            const double t = s + v;
            comp += (std::abs(s) >= std::abs(v)) ? (s - t) + v : (v - t) + s;
            s = t;
        }
        return (s + comp) * cell_measure();
    }

    void normalize() {
        const double m = mass();
        if (!(m > 0.0)) throw invalid_parameter("DensityGrid::normalize: zero mass");
        for (double& v : values) v /= m;
    }

    // Bilinear interpolation between cell centers; zero outside the grid box
    // (and for non-finite query points).
    double interpolate(double a, double b) const {
        if (!(a >= c1_min && a <= c1_max && b >= c2_min && b <= c2_max)) return 0.0;
        double fi = (a - c1_min) / h1() - 0.5;
        double fj = (b - c2_min) / h2() - 0.5;
        fi = std::min(std::max(fi, 0.0), double(n1 - 1));
        fj = std::min(std::max(fj, 0.0), double(n2 - 1));
        const int i0 = std::min(int(fi), n1 - 2 >= 0 ? n1 - 2 : 0);
        const int j0 = std::min(int(fj), n2 - 2 >= 0 ? n2 - 2 : 0);
        const double wx = fi - double(i0);
        const double wy = fj - double(j0);
        const int i1 = std::min(i0 + 1, n1 - 1);
        const int j1 = std::min(j0 + 1, n2 - 1);
        return (1 - wx) * (1 - wy) * at(i0, j0) + wx * (1 - wy) * at(i1, j0) +
               (1 - wx) * wy * at(i0, j1) + wx * wy * at(i1, j1);
    }
};

inline DensityGrid make_grid(Chart chart, double c1_min, double c1_max, double c2_min,
                             double c2_max, int n1, int n2) {
    if (n1 < 1 || n2 < 1) throw invalid_parameter("make_grid: need n1, n2 >= 1");
    if (!(c1_max > c1_min && c2_max > c2_min))
        throw invalid_parameter("make_grid: empty coordinate ranges");
    DensityGrid g;
    g.chart = chart;
    g.c1_min = c1_min;
    g.c1_max = c1_max;
    g.c2_min = c2_min;
    g.c2_max = c2_max;
    g.n1 = n1;
    g.n2 = n2;
    g.values.assign(std::size_t(n1) * std::size_t(n2), 0.0);
    return g;
}

inline void require_same_geometry(const DensityGrid& a, const DensityGrid& b) {
    const bool same = a.chart == b.chart && a.n1 == b.n1 && a.n2 == b.n2 &&
                      a.c1_min == b.c1_min && a.c1_max == b.c1_max && a.c2_min == b.c2_min &&
                      a.c2_max == b.c2_max;
    if (!same) throw grid_mismatch("grids differ in chart, size or ranges");
}

// L1 distance between two densities on the same grid, sum |a - b| * cell.
inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    require_same_geometry(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) s += std::abs(a.values[k] - b.values[k]);
    return s * a.cell_measure();
}

// Block-sum to a coarser grid; factor must divide both dimensions. Mass is
// preserved exactly.
inline DensityGrid aggregate(const DensityGrid& g, int factor) {
    if (factor < 1 || g.n1 % factor != 0 || g.n2 % factor != 0)
        throw invalid_parameter("aggregate: factor must divide grid dimensions");
    DensityGrid out = make_grid(g.chart, g.c1_min, g.c1_max, g.c2_min, g.c2_max, g.n1 / factor,
                                g.n2 / factor);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) out.at(i / factor, j / factor) += g.at(i, j);
    for (double& v : out.values) v /= double(factor) * double(factor);
    return out;
}

// --- serialization ---------------------------------------------------------
//
// Self-describing text format:
//   chart=log
//   nx=200
//   ny=200
//   ranges=<c1_min> <c1_max> <c2_min> <c2_max>
//   <values, row-major, whitespace separated>

namespace detail {
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

inline void write_grid(const DensityGrid& g, std::ostream& os) {
    os << "chart=" << chart_name(g.chart) << "\n";
    os << "nx=" << g.n1 << "\n";
    os << "ny=" << g.n2 << "\n";
    os << "ranges=" << detail::format_full(g.c1_min) << ' ' << detail::format_full(g.c1_max)
       << ' ' << detail::format_full(g.c2_min) << ' ' << detail::format_full(g.c2_max) << "\n";
    for (int j = 0; j < g.n2; ++j) {
        for (int i = 0; i < g.n1; ++i) {
            os << detail::format_full(g.at(i, j));
            os << (i + 1 == g.n1 ? '\n' : ' ');
        }
    }
}

inline DensityGrid read_grid(std::istream& is) {
    auto expect_key = [&](const char* key) {
        std::string line;
        if (!std::getline(is, line)) throw io_error("grid parse: unexpected end of file");
        const std::string prefix = std::string(key) + "=";
        if (line.rfind(prefix, 0) != 0)
            throw io_error("grid parse: expected '" + prefix + "...', got '" + line + "'");
        return line.substr(prefix.size());
    };
    DensityGrid g;
    g.chart = chart_from_name(expect_key("chart"));
    g.n1 = std::stoi(expect_key("nx"));
    g.n2 = std::stoi(expect_key("ny"));
    {
        std::istringstream rs(expect_key("ranges"));
        if (!(rs >> g.c1_min >> g.c1_max >> g.c2_min >> g.c2_max))
            throw io_error("grid parse: malformed ranges line");
    }
    if (g.n1 < 1 || g.n2 < 1) throw io_error("grid parse: non-positive dimensions");
    g.values.resize(std::size_t(g.n1) * std::size_t(g.n2));
    for (auto& v : g.values)
        if (!(is >> v)) throw io_error("grid parse: too few values");
    return g;
}

inline void write_grid_file(const DensityGrid& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_grid(g, os);
}

inline DensityGrid read_grid_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open for reading: " + path);
    return read_grid(is);
}

inline std::pair<std::string, std::string> chart_axis_names(Chart c) {
    switch (c) {
        case Chart::cartesian: return {"x", "y"};
        case Chart::log_im: return {"x", "z"};
        case Chart::angular: return {"alpha", "u"};
        case Chart::alpha_im: return {"alpha", "y"};
    }
    return {"c1", "c2"};
}

inline void write_grid_csv(const DensityGrid& g, std::ostream& os) {
    const auto [n1, n2] = chart_axis_names(g.chart);
    os << n1 << ',' << n2 << ",value\n";
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            os << detail::format_full(g.c1_center(i)) << ',' << detail::format_full(g.c2_center(j))
               << ',' << detail::format_full(g.at(i, j)) << "\n";
}

// --- chart conversion ------------------------------------------------------

// |det d(x,y)/d(chart coords)| at a point of the chart.
inline double jacobian_xy_by_chart(Chart c, double c1, double c2) {
    switch (c) {
        case Chart::cartesian: return 1.0;
        case Chart::log_im: return std::exp(c2);
        case Chart::angular: {
            const double s = std::sin(c1);
            return 1.0 / (2.0 * s * s);
        }
        case Chart::alpha_im: {
            const double s = std::sin(c1);
            return c2 / (s * s);
        }
    }
    return 1.0;
}

// Resample a normalized density into another chart. Densities transform with
// the exact Jacobian factors; values are picked up by bilinear interpolation
// at mapped cell centers and the result is renormalized (interpolation keeps
// mass to ~1e-3 on resolved grids). Throws target_range_uncovered if more
// than 0.1% of the source mass maps outside the target box.
inline DensityGrid convert_chart(const DensityGrid& src, const DensityGrid& target_geometry) {
    DensityGrid out = make_grid(target_geometry.chart, target_geometry.c1_min,
                                target_geometry.c1_max, target_geometry.c2_min,
                                target_geometry.c2_max, target_geometry.n1, target_geometry.n2);

    // mass coverage check, on source cells
    double outside = 0.0, total = 0.0;
    for (int j = 0; j < src.n2; ++j)
        for (int i = 0; i < src.n1; ++i) {
            const double m = src.at(i, j);
            if (m == 0.0) continue;
            total += m;
            ChartPoint p{src.chart, src.c1_center(i), src.c2_center(j)};
            ChartPoint q = convert_point(p, out.chart);
            if (q.c1 < out.c1_min || q.c1 > out.c1_max || q.c2 < out.c2_min || q.c2 > out.c2_max)
                outside += m;
        }
    if (total > 0.0 && outside > 1e-3 * total)
        throw target_range_uncovered("convert_chart: source support maps outside target grid");

    for (int j = 0; j < out.n2; ++j) {
        for (int i = 0; i < out.n1; ++i) {
            const double t1 = out.c1_center(i);
            const double t2 = out.c2_center(j);
            ChartPoint sp;
            try {
                sp = convert_point({out.chart, t1, t2}, src.chart);
            } catch (const invalid_parameter&) {
                continue; // target cell outside the image of the source chart
            }
            const double v = src.interpolate(sp.c1, sp.c2);
            if (v == 0.0) continue;
            const double jac = jacobian_xy_by_chart(out.chart, t1, t2) /
                               jacobian_xy_by_chart(src.chart, sp.c1, sp.c2);
            out.at(i, j) = v * jac;
        }
    }
    out.normalize();
    return out;
}

// Convenience overload: derive the target box from the image of the source
// cell centers, padded by one cell.
inline DensityGrid convert_chart(const DensityGrid& src, Chart target) {
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (int j = 0; j < src.n2; ++j)
        for (int i = 0; i < src.n1; ++i) {
            if (src.at(i, j) == 0.0) continue;
            ChartPoint q = convert_point({src.chart, src.c1_center(i), src.c2_center(j)}, target);
            lo1 = std::min(lo1, q.c1);
            hi1 = std::max(hi1, q.c1);
            lo2 = std::min(lo2, q.c2);
            hi2 = std::max(hi2, q.c2);
        }
    if (lo1 > hi1) throw empty_set("convert_chart: source grid carries no mass");
    const double pad1 = (hi1 - lo1 + 1e-12) / double(src.n1);
    const double pad2 = (hi2 - lo2 + 1e-12) / double(src.n2);
    lo1 -= pad1;
    hi1 += pad1;
    lo2 -= pad2;
    hi2 += pad2;
    // clamp the padded box to the target chart's domain
    constexpr double pi = 3.14159265358979323846;
    if (target == Chart::angular || target == Chart::alpha_im) {
        lo1 = std::max(lo1, 1e-12);
        hi1 = std::min(hi1, pi - 1e-12);
    }
    if (target == Chart::angular || target == Chart::alpha_im || target == Chart::cartesian)
        lo2 = std::max(lo2, 1e-12);
    DensityGrid geom = make_grid(target, lo1, hi1, lo2, hi2, src.n1, src.n2);
    return convert_chart(src, geom);
}

} // namespace sletip
