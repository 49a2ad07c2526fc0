#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sletip/grid.hpp"

namespace sletip {

// Minimal self-contained SVG 1.1 emission: scatter plots in the Figure-1
// style, heatmaps with a log color scale, and profile plots with an error
// band. No external tooling; the output is plain text and diffs cleanly.

namespace svg_detail {

struct Frame {
    double width = 640, height = 480;
    double ml = 64, mr = 20, mt = 20, mb = 48;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return ml + (x - x0) / (x1 - x0) * (width - ml - mr); }
    double py(double y) const { return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb); }
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void open_svg(std::ostringstream& os, const Frame& f) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 "
       << fmt(f.width) << ' ' << fmt(f.height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

inline void axes(std::ostringstream& os, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel) {
    os << "<g stroke=\"black\" fill=\"none\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << fmt(f.ml) << "\" y1=\"" << fmt(f.height - f.mb) << "\" x2=\""
       << fmt(f.width - f.mr) << "\" y2=\"" << fmt(f.height - f.mb) << "\"/>\n";
    os << "<line x1=\"" << fmt(f.ml) << "\" y1=\"" << fmt(f.mt) << "\" x2=\"" << fmt(f.ml)
       << "\" y2=\"" << fmt(f.height - f.mb) << "\"/>\n";
    os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (double t : nice_ticks(f.x0, f.x1)) {
        const double x = f.px(t);
        os << "<line stroke=\"black\" x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.height - f.mb)
           << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(f.height - f.mb + 5) << "\"/>\n";
        os << "<text text-anchor=\"middle\" x=\"" << fmt(x) << "\" y=\""
           << fmt(f.height - f.mb + 18) << "\">" << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(f.y0, f.y1)) {
        const double y = f.py(t);
        os << "<line stroke=\"black\" x1=\"" << fmt(f.ml - 5) << "\" y1=\"" << fmt(y)
           << "\" x2=\"" << fmt(f.ml) << "\" y2=\"" << fmt(y) << "\"/>\n";
        os << "<text text-anchor=\"end\" x=\"" << fmt(f.ml - 8) << "\" y=\"" << fmt(y + 4)
           << "\">" << fmt(t) << "</text>\n";
    }
    os << "<text text-anchor=\"middle\" x=\"" << fmt(0.5 * (f.ml + f.width - f.mr)) << "\" y=\""
       << fmt(f.height - 10) << "\">" << xlabel << "</text>\n";
    os << "<text text-anchor=\"middle\" transform=\"translate(16," << fmt(0.5 * f.height)
       << ") rotate(-90)\">" << ylabel << "</text>\n";
    os << "</g>\n";
}

// five-stop blue->yellow color map
inline std::string heat_color(double v) {
    static const double stops[5][3] = {{68, 1, 84},    {59, 82, 139},  {33, 145, 140},
                                       {94, 201, 98},  {253, 231, 37}};
    v = std::clamp(v, 0.0, 1.0) * 4.0;
    const int i = std::min(3, int(v));
    const double w = v - i;
    char buf[32];
    std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)",
                  int(stops[i][0] + w * (stops[i + 1][0] - stops[i][0])),
                  int(stops[i][1] + w * (stops[i + 1][1] - stops[i][1])),
                  int(stops[i][2] + w * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

} // namespace svg_detail

inline std::string svg_scatter(std::span<const double> xs, std::span<const double> ys,
                               const std::string& xlabel, const std::string& ylabel,
                               double x0, double x1, double y0, double y1) {
    svg_detail::Frame f;
    f.x0 = x0;
    f.x1 = x1;
    f.y0 = y0;
    f.y1 = y1;
    std::ostringstream os;
    svg_detail::open_svg(os, f);
    svg_detail::axes(os, f, xlabel, ylabel);
    os << "<g fill=\"rgb(31,119,180)\" fill-opacity=\"0.45\">\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < x0 || xs[i] > x1 || ys[i] < y0 || ys[i] > y1) continue;
        os << "<circle cx=\"" << svg_detail::fmt(f.px(xs[i])) << "\" cy=\""
           << svg_detail::fmt(f.py(ys[i])) << "\" r=\"1.2\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

// Heatmap of a density grid with a logarithmic color scale spanning the top
// six decades of the value range.
inline std::string svg_heatmap(const DensityGrid& g, const std::string& xlabel,
                               const std::string& ylabel) {
    svg_detail::Frame f;
    f.x0 = g.c1_min;
    f.x1 = g.c1_max;
    f.y0 = g.c2_min;
    f.y1 = g.c2_max;
    std::ostringstream os;
    svg_detail::open_svg(os, f);
    double vmax = 0.0;
    for (double v : g.values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    const double lmax = std::log10(vmax);
    const double lmin = lmax - 6.0;
    os << "<g shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < g.n2; ++j) {
        for (int i = 0; i < g.n1; ++i) {
            const double v = g.at(i, j);
            if (v <= 0.0) continue;
            const double t = (std::log10(v) - lmin) / (lmax - lmin);
            if (t <= 0.0) continue;
            const double xa = f.px(g.c1_min + i * g.h1());
            const double xb = f.px(g.c1_min + (i + 1) * g.h1());
            const double ya = f.py(g.c2_min + (j + 1) * g.h2());
            const double yb = f.py(g.c2_min + j * g.h2());
            os << "<rect x=\"" << svg_detail::fmt(xa) << "\" y=\"" << svg_detail::fmt(ya)
               << "\" width=\"" << svg_detail::fmt(xb - xa) << "\" height=\""
               << svg_detail::fmt(yb - ya) << "\" fill=\"" << svg_detail::heat_color(t)
               << "\"/>\n";
        }
    }
    os << "</g>\n";
    svg_detail::axes(os, f, xlabel, ylabel);
    os << "</svg>\n";
    return os.str();
}

// Profile with a +-3 stderr band and an optional reference curve.
inline std::string svg_profile(std::span<const double> alphas, std::span<const double> values,
                               std::span<const double> stderrs,
                               std::span<const double> reference, const std::string& xlabel,
                               const std::string& ylabel) {
    svg_detail::Frame f;
    f.x0 = alphas.empty() ? 0.0 : alphas.front();
    f.x1 = alphas.empty() ? 1.0 : alphas.back();
    double vmax = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isfinite(values[i])) vmax = std::max(vmax, values[i] + 3.0 * stderrs[i]);
    for (double r : reference) vmax = std::max(vmax, r);
    f.y0 = 0.0;
    f.y1 = vmax > 0.0 ? 1.05 * vmax : 1.0;
    std::ostringstream os;
    svg_detail::open_svg(os, f);
    svg_detail::axes(os, f, xlabel, ylabel);

    auto poly = [&](std::span<const double> ys, const char* style) {
        os << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            os << svg_detail::fmt(f.px(alphas[i])) << ',' << svg_detail::fmt(f.py(ys[i])) << ' ';
        }
        os << "\"/>\n";
    };

    // band as a closed polygon
    os << "<polygon fill=\"rgb(31,119,180)\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (std::isfinite(values[i]))
            os << svg_detail::fmt(f.px(alphas[i])) << ','
               << svg_detail::fmt(f.py(values[i] + 3.0 * stderrs[i])) << ' ';
    for (std::size_t i = alphas.size(); i-- > 0;)
        if (std::isfinite(values[i]))
            os << svg_detail::fmt(f.px(alphas[i])) << ','
               << svg_detail::fmt(f.py(std::max(0.0, values[i] - 3.0 * stderrs[i]))) << ' ';
    os << "\"/>\n";

    poly(values, "stroke=\"rgb(31,119,180)\" stroke-width=\"1.5\"");
    if (!reference.empty())
        poly(reference, "stroke=\"rgb(214,39,40)\" stroke-width=\"1.2\" stroke-dasharray=\"5,3\"");
    os << "</svg>\n";
    return os.str();
}

} // namespace sletip
