#pragma once

// Numerical laboratory for the law of the SLE tip at fixed capacity time:
// reverse-flow and diffusion samplers, the stationary Fokker-Planck solver,
// closed-form references, and the Monte Carlo experiment harness.

#include "sletip/analytics.hpp"
#include "sletip/charts.hpp"
#include "sletip/config.hpp"
#include "sletip/diffusion.hpp"
#include "sletip/driver.hpp"
#include "sletip/errors.hpp"
#include "sletip/fpk.hpp"
#include "sletip/gamma.hpp"
#include "sletip/grid.hpp"
#include "sletip/harness.hpp"
#include "sletip/loewner.hpp"
#include "sletip/quadrature.hpp"
#include "sletip/report.hpp"
#include "sletip/rng.hpp"
#include "sletip/samples.hpp"
#include "sletip/spline.hpp"
#include "sletip/stats.hpp"
#include "sletip/svg.hpp"
