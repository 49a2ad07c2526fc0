#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sletip/errors.hpp"
#include "sletip/rng.hpp"

namespace sletip {

// A Brownian driver sqrt(kappa) * B_t sampled on a uniform grid of step dt.
// values[0] == 0 and values has at least two entries. Regenerating with the
// same (seed, stream_id, kappa, dt, n_steps) reproduces the sequence
// bit-for-bit.
struct DrivingFunction {
    double kappa = 0.0;
    double dt = 0.0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    double horizon() const { return dt * double(values.size() - 1); }

    // Piecewise-linear interpolation between grid samples.
    double value_at(double t) const {
        if (t < 0.0 || t > horizon() * (1.0 + 1e-12))
            throw horizon_exceeded("driver evaluated outside [0, horizon]");
        const double s = t / dt;
        auto k = static_cast<std::size_t>(s);
        if (k >= values.size() - 1) return values.back();
        const double frac = s - double(k);
        return values[k] + frac * (values[k + 1] - values[k]);
    }
};

inline DrivingFunction sample_driver(double kappa, double dt, std::int64_t n_steps,
                                     std::uint64_t seed, std::uint64_t stream_id) {
    if (!(kappa >= 0.0)) throw invalid_parameter("sample_driver: kappa must be >= 0");
    if (!(dt > 0.0)) throw invalid_parameter("sample_driver: dt must be > 0");
    if (n_steps < 1) throw invalid_parameter("sample_driver: n_steps must be >= 1");

    DrivingFunction d;
    d.kappa = kappa;
    d.dt = dt;
    d.seed = seed;
    d.stream_id = stream_id;
    d.values.resize(static_cast<std::size_t>(n_steps) + 1);
    d.values[0] = 0.0;
    Rng rng(seed, stream_id);
    const double sigma = std::sqrt(kappa * dt);
    for (std::size_t k = 1; k < d.values.size(); ++k)
        d.values[k] = d.values[k - 1] + sigma * rng.normal();
    return d;
}

} // namespace sletip
