#pragma once

#include "rp/crp.hpp"
#include "rp/young.hpp"

namespace rp {

/// Fixed-point solver configuration. Windows are sized from the measured
/// contraction estimate ||Df|| ||x||_p omega(window)^{1/p} (1 + K_sew) <
/// safety and halved when the iteration fails to contract; a window below a
/// single grid step raises DivergenceError.
struct SolveSpec {
  double tol = 1e-10;
  int max_iter = 60;
  bool stack = true;   // false forces a single window over the horizon
  double safety = 0.5;
};

struct WindowStat {
  int i0 = 0, i1 = 0;
  int iters = 0;
  double residual = 0;
  std::vector<double> residual_history;
};

struct YoungSolution {
  DiscretePath y;
  std::vector<WindowStat> windows;
};

struct RoughSolution {
  ControlledPath y;
  std::vector<WindowStat> windows;
};

/// Solution restricted to a grid index span [i0, i1]; used by the flow and
/// Jacobian operations.
struct SpanSolve {
  int i0 = 0, i1 = 0;
  std::vector<Vec> y;     // values at instants i0..i1
  std::vector<Mat> ydag;  // rough regime only
  std::vector<WindowStat> windows;
};

/// Young-regime RDE y_t = a + int f(y) dx + b_{0,t}, 1 <= p < 2. Picard
/// iteration per window on the compensated trapezoid germ; the additive
/// forcing enters through its increments only (its start value is ignored).
YoungSolution solve_young(const Vec& a, const VectorField& f, const DiscretePath& x,
                          const DiscretePath& b, double p, const ControlFn& omega,
                          const SolveSpec& spec);

/// Rough-regime RDE as a CRP, 2 <= p < 3:
///   y_t = a + int f(y) dz + bmat z_{0,t},  ydag_t = f(y_t) zdag_t + bmat zdag_t.
/// bmat may be empty (no forcing). The returned dagger satisfies the
/// displayed rule exactly by a final refresh.
RoughSolution solve_rough(const Vec& a, const Mat& bmat, const VectorField& f,
                          const ControlledPath& Z, const SolveSpec& spec);

SpanSolve solve_rough_span(const Vec& a, const Mat& bmat, const VectorField& f,
                           const ControlledPath& Z, const SolveSpec& spec, int i0, int i1);

/// Mixed equation y = a + int f(y) dz + int g(y) dh; the Young term drives
/// the value only (the dagger keeps the rough rule). Requires 1/p + 1/q_h > 1.
RoughSolution solve_mixed(const Vec& a, const VectorField& f, const VectorField& g,
                          const ControlledPath& Z, const DiscretePath& h, double q_h,
                          const SolveSpec& spec);

/// Solves the epsilon-dilated family y^eps = a + int f(y^eps) d(d_eps x) +
/// int g(y^eps) dh for each epsilon; at eps = 0 this is the Young equation
/// in h alone.
std::vector<RoughSolution> dilated_family(const Vec& a, const VectorField& f, const VectorField& g,
                                          const RoughPath& X, const DiscretePath& h, double q_h,
                                          const std::vector<double>& eps_list, const SolveSpec& spec);

/// A-priori sewing constant 1 / (1 - 2^{1-theta}), theta > 1.
double sewing_constant(double theta);

}  // namespace rp
