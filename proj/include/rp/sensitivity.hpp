#pragma once

#include "rp/rde.hpp"

namespace rp {

/// Augmented vector field for the variational equation: the pair (y, M)
/// solves d(y, M) = (f(y), Df(y) M) dz, so M is the Jacobian of the flow in
/// the initial point. Requires f.k >= 2 (Df enters the drift).
VectorField variational_extension(const VectorField& f);

/// Augmented field for the linear-response equation: (y, u) solves
/// d(y, u) = (f(y), Df(y) u + g(y)) dz.
VectorField directional_extension(const VectorField& f, const VectorField& g);

/// f + scale * g, derivatives added analytically.
VectorField add_fields(const VectorField& f, const VectorField& g, double scale);

struct JacobianFlow {
  int i0 = 0, i1 = 0;
  std::vector<Vec> y;   // base trajectory on [i0, i1]
  std::vector<Mat> M;   // D_a y_{t_i, t_{i0}}, M[0] = Id
  std::vector<WindowStat> windows;
};

/// Solves M_t = Id + int_r^t Df(y_s) M_s dZ_s alongside the base solution
/// via the augmented system.
JacobianFlow jacobian_flow(const Vec& a, const VectorField& f, const ControlledPath& Z,
                           const SolveSpec& spec, int r_idx, int t_idx);

/// Central-difference Jacobian (J(a + d e_i) - J(a - d e_i)) / 2d at t_idx.
Mat jacobian_fd(const Vec& a, const VectorField& f, const ControlledPath& Z, const SolveSpec& spec,
                int r_idx, int t_idx, double delta);

/// |y_{t,r}(a) - y_{t,s}(y_{s,r}(a))| for grid indices r < s < t.
double flow_compose_check(const Vec& a, const VectorField& f, const ControlledPath& Z,
                          const SolveSpec& spec, int r_idx, int s_idx, int t_idx);

struct InvertibilityReport {
  double opnorm_gap = 0;      // max ||M_t - Id||_op over the window
  bool neumann_invertible = false;  // gap < 1
  double det_min = 0;         // min |det M_t|
  bool det_invertible = false;
};

InvertibilityReport invertibility_check(const Vec& a, const VectorField& f, const ControlledPath& Z,
                                        const SolveSpec& spec, int r_idx, int t_idx);

/// Base problem for the perturbation scans; the driver enters through its
/// rough path so dilation/translation perturbations can rebuild the lift.
struct RdeProblem {
  Vec a;
  VectorField f;
  std::shared_ptr<const RoughPath> X;
  SolveSpec spec;
};

struct PerturbationSpec {
  enum class Kind { initial_point, field_direction, dilation, translation };
  Kind kind = Kind::initial_point;
  Vec direction;              // initial-point kind
  VectorField field_direction;  // field kind
  DiscretePath h_direction;   // translation kind
  double q_h = 1.0;
  std::vector<double> sizes;  // positive, decreasing, >= 3 entries
  int jobs = 1;               // perturbed solves are independent; report order is fixed
};

struct ScanReport {
  std::string kind;
  std::vector<double> deltas;
  std::vector<double> responses;
  double slope = 0;
  double r2 = 0;
  std::vector<std::string> flags;
};

/// Solves the perturbed problems at every size, measures
/// ||J(perturbed) - J(base)|| (the full CRP norm for same-base kinds, the
/// pathwise (p, q)-variation metric when the base rough path changes) and
/// fits the log-log slope. The solver tolerance is tightened to
/// min(tol, delta_min^2 / 100).
ScanReport perturbation_response(const RdeProblem& base, const PerturbationSpec& pert);

/// Linear-response path u = int Df(y) u dZ + int g(y) dZ via the augmented
/// system; the formal derivative of the Ito map in the field direction g.
ControlledPath field_directional_derivative(const Vec& a, const VectorField& f,
                                            const VectorField& g, const ControlledPath& Z,
                                            const SolveSpec& spec);

/// Endpoint discrepancy between the linear-response path and the central
/// difference (J(f + eps g) - J(f - eps g)) / (2 eps).
double field_directional_fd_check(const Vec& a, const VectorField& f, const VectorField& g,
                                  const ControlledPath& Z, const SolveSpec& spec, double eps);

/// OLS of log(response) on log(delta): slope, intercept and r^2.
struct LogLogFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};
LogLogFit loglog_fit(const std::vector<double>& deltas, const std::vector<double>& responses);

}  // namespace rp
