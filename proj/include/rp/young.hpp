#pragma once

#include "rp/grid.hpp"
#include "rp/linalg.hpp"

namespace rp {

struct YoungReport {
  bool interpolated = false;  // integrand moved onto the integrator's grid
  double theta = 0;           // 1/p + 1/q
};

/// Young integral of a matrix-valued integrand y (values dV x dU, stored
/// flattened row-major) against a dU-valued integrator x on the same grid.
/// Requires 1/p + 1/q > 1.
///
/// Per step the integral uses the trapezoid germ 1/2 (y_s + y_t) x_{s,t},
/// which is the exact Young integral of the piecewise-linear interpolants of
/// the data; multi-interval values are the compensated germ sums, so Chasles
/// additivity is exact. The left-point compensated form of the classical
/// bound is still what young_bound_check measures.
///
/// If the grids differ and the integrator's grid refines the integrand's,
/// the integrand is linearly interpolated onto it (flagged in the report);
/// the integrator is never interpolated.
DiscretePath young_integral(const DiscretePath& y, const DiscretePath& x, double p, double q,
                            const ControlFn& omega, YoungReport* report = nullptr);

/// Measured constant of the compensated Young bound:
/// max over scanned pairs of |int_s^t y dx - y_s x_{s,t}| /
/// (||y||_q ||x||_p omega^{1/p+1/q}). Pairs with vanishing norms are skipped.
double young_bound_check(const DiscretePath& y, const DiscretePath& x, double p, double q,
                         const ControlFn& omega);

}  // namespace rp
