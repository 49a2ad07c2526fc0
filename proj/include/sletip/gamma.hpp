#pragma once

#include <cmath>

#include "sletip/errors.hpp"

namespace sletip {

// Gamma function for positive real argument, Lanczos approximation (g = 7,
// 9 coefficients). Relative error is below 1e-13 on (0, 50]; arguments in
// (0, 1/2) are lifted through the recurrence Gamma(x) = Gamma(x+1)/x.
inline double gamma_fn(double x) {
    if (!(x > 0.0)) throw invalid_parameter("gamma_fn: argument must be > 0");

    static constexpr double g = 7.0;
    static constexpr double coeff[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,       -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    static constexpr double sqrt_two_pi = 2.5066282746310005024;

    double shift = 1.0;
    while (x < 0.5) { // at most one round for x > 0 inputs below 1/2
        shift *= x;
        x += 1.0;
    }

    const double z = x - 1.0;
    double a = coeff[0];
    for (int i = 1; i < 9; ++i) a += coeff[i] / (z + double(i));
    const double t = z + g + 0.5;
    return sqrt_two_pi * std::pow(t, z + 0.5) * std::exp(-t) * a / shift;
}

} // namespace sletip
