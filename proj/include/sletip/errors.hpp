#pragma once

#include <stdexcept>
#include <string>

namespace sletip {

// Caller passed a parameter outside an operation's documented domain.
struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested evaluation time lies beyond the driver's horizon.
struct horizon_exceeded : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// A grid was handed to an operation expecting a different chart.
struct chart_mismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct grid_too_small : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The discrete stationary operator has no numerical kernel; this signals a
// discretization bug rather than a property of the continuous problem.
struct no_kernel_found : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Negative entries clipped from a kernel vector carried too much mass.
struct negative_mass : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct target_range_uncovered : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct quadrature_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct insufficient_bins : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct grid_mismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct empty_set : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct t_max_insufficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sletip
