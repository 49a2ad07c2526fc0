#pragma once

#include <cmath>
#include <string>

#include "sletip/errors.hpp"

namespace sletip {

// Coordinate charts for the tip law.
//   cartesian : (x, y)          x = Re, y = Im > 0
//   log_im    : (x, z)          z = log y
//   angular   : (alpha, u)      alpha = arg in (0,pi), u = y^2
//   alpha_im  : (alpha, y)      scatter/plot coordinates
enum class Chart { cartesian, log_im, angular, alpha_im };

inline std::string chart_name(Chart c) {
    switch (c) {
        case Chart::cartesian: return "cartesian";
        case Chart::log_im: return "log";
        case Chart::angular: return "angular";
        case Chart::alpha_im: return "alpha-y";
    }
    return "?";
}

inline Chart chart_from_name(const std::string& s) {
    if (s == "cartesian") return Chart::cartesian;
    if (s == "log") return Chart::log_im;
    if (s == "angular") return Chart::angular;
    if (s == "alpha-y") return Chart::alpha_im;
    throw invalid_parameter("unknown chart name: " + s);
}

struct ChartPoint {
    Chart chart = Chart::cartesian;
    double c1 = 0.0;
    double c2 = 0.0;
};

// Conversions route through the cartesian chart.
inline ChartPoint to_cartesian(const ChartPoint& p) {
    constexpr double pi = 3.14159265358979323846;
    switch (p.chart) {
        case Chart::cartesian: return p;
        case Chart::log_im: return {Chart::cartesian, p.c1, std::exp(p.c2)};
        case Chart::angular: {
            if (!(p.c1 > 0.0 && p.c1 < pi && p.c2 > 0.0))
                throw invalid_parameter("angular chart needs alpha in (0,pi), u > 0");
            const double y = std::sqrt(p.c2);
            return {Chart::cartesian, y * std::cos(p.c1) / std::sin(p.c1), y};
        }
        case Chart::alpha_im:
            if (!(p.c1 > 0.0 && p.c1 < pi && p.c2 > 0.0))
                throw invalid_parameter("alpha-y chart needs alpha in (0,pi), y > 0");
            return {Chart::cartesian, p.c2 * std::cos(p.c1) / std::sin(p.c1), p.c2};
    }
    return p;
}

inline ChartPoint convert_point(const ChartPoint& p, Chart target) {
    if (p.chart == target) return p;
    const ChartPoint c = to_cartesian(p);
    const double x = c.c1, y = c.c2;
    switch (target) {
        case Chart::cartesian: return c;
        case Chart::log_im:
            if (y <= 0.0) throw invalid_parameter("log chart needs y > 0");
            return {Chart::log_im, x, std::log(y)};
        case Chart::angular:
            if (y <= 0.0) throw invalid_parameter("angular chart needs y > 0");
            return {Chart::angular, std::atan2(y, x), y * y};
        case Chart::alpha_im:
            if (y <= 0.0) throw invalid_parameter("alpha-y chart needs y > 0");
            return {Chart::alpha_im, std::atan2(y, x), y};
    }
    return c;
}

// One draw of the tip, stored in cartesian coordinates with the other charts
// derived on demand. alpha = arccot(x/y) coincides with atan2(y, x) on y > 0.
struct TipSample {
    double x = 0.0;
    double y = 0.0;

    double z() const { return std::log(y); }
    double alpha() const { return std::atan2(y, x); }
    double u() const { return y * y; }

    ChartPoint in(Chart c) const { return convert_point({Chart::cartesian, x, y}, c); }
};

} // namespace sletip
