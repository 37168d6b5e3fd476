#include "rp/young.hpp"

#include <algorithm>
#include <cmath>

#include "rp/sewing.hpp"

namespace rp {

namespace {

// y value at instant i interpreted as a dV x dU matrix applied to dx.
Vec apply_flat(const Vec& yflat, const Vec& dx) {
  const size_t du = dx.size();
  if (yflat.size() % du != 0) throw DimensionError("young: integrand is not L(U,V)-shaped");
  const size_t dv = yflat.size() / du;
  Vec out(dv, 0.0);
  for (size_t i = 0; i < dv; ++i) {
    double s = 0;
    for (size_t j = 0; j < du; ++j) s += yflat[i * du + j] * dx[j];
    out[i] = s;
  }
  return out;
}

}  // namespace

DiscretePath young_integral(const DiscretePath& y_in, const DiscretePath& x, double p, double q,
                            const ControlFn& omega, YoungReport* report) {
  x.check();
  y_in.check();
  if (1.0 / p + 1.0 / q <= 1.0) throw RegimeError("young_integral: 1/p + 1/q must exceed 1");
  YoungReport rep;
  rep.theta = 1.0 / p + 1.0 / q;
  const DiscretePath* y = &y_in;
  DiscretePath interpolated;
  if (!(y_in.grid == x.grid)) {
    // The common refinement must equal the integrator's grid: every
    // integrand instant has to be an integrator instant, otherwise the
    // integrator itself would need interpolation.
    size_t k = 0;
    for (double t : y_in.grid.times()) {
      while (k < x.grid.times().size() && x.grid.times()[k] < t - 1e-12) ++k;
      if (k >= x.grid.times().size() || std::abs(x.grid.times()[k] - t) > 1e-12)
        throw InvalidGridError("young_integral: integrator grid must refine the integrand grid");
    }
    interpolated = interpolate_to(y_in, x.grid);
    y = &interpolated;
    rep.interpolated = true;
  }
  (void)omega;

  const size_t du = static_cast<size_t>(x.dim);
  if (y->values.front().size() % du != 0) throw DimensionError("young_integral: dimension mismatch");
  const size_t dv = y->values.front().size() / du;

  DiscretePath out(x.grid, static_cast<int>(dv));
  std::vector<KahanSum> acc(dv);
  for (int k = 0; k < x.grid.steps(); ++k) {
    const Vec dx = x.increment(k, k + 1);
    Vec mid = y->values[static_cast<size_t>(k)];
    for (size_t c = 0; c < mid.size(); ++c)
      mid[c] = 0.5 * (mid[c] + y->values[static_cast<size_t>(k + 1)][c]);
    const Vec germ = apply_flat(mid, dx);
    for (size_t c = 0; c < dv; ++c) {
      acc[c].add(germ[c]);
      out.values[static_cast<size_t>(k + 1)][c] = acc[c].value();
    }
  }
  if (report) *report = rep;
  return out;
}

double young_bound_check(const DiscretePath& y, const DiscretePath& x, double p, double q,
                         const ControlFn& omega) {
  const DiscretePath integral = young_integral(y, x, p, q, omega);
  const double ny = pvar_norm(y, q, omega);
  const double nx = pvar_norm(x, p, omega);
  if (ny == 0 || nx == 0) return 0.0;
  const double theta = 1.0 / p + 1.0 / q;
  double worst = 0;
  for_each_scan_pair(x.grid.size(), [&](int i, int j) {
    const double w = omega(x.grid.t(i), x.grid.t(j));
    if (w <= 0) return;
    const Vec compensated =
        integral.increment(i, j) - apply_flat(y.values[static_cast<size_t>(i)], x.increment(i, j));
    worst = std::max(worst, norm2(compensated) / (ny * nx * std::pow(w, theta)));
  });
  return worst;
}

}  // namespace rp
