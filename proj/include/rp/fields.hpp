#pragma once

#include <functional>
#include <string>

#include "rp/grid.hpp"
#include "rp/linalg.hpp"

namespace rp {

/// A C^{k+gamma} map f: R^{in_dim} -> R^{rows x cols} with analytic
/// derivatives up to order k. Solver vector fields have cols = driver
/// dimension; plain maps (cols = 1) feed the Omega/Hoelder operations.
///
/// Derivative layout (everything row-major and flattened):
///   value(y)  : rows x cols
///   deriv1(y) : (rows*cols) x in_dim            d f_m / d y_k
///   deriv2(y) : (rows*cols) x (in_dim*in_dim)   d^2 f_m / d y_k d y_l
class VectorField {
 public:
  std::string name;
  int in_dim = 0, rows = 0, cols = 0;
  int k = 0;           // analytic derivative orders available
  double gamma = 1.0;  // Hoelder exponent of D^k f

  std::function<Mat(const Vec&)> value;
  std::function<Mat(const Vec&)> deriv1;
  std::function<Mat(const Vec&)> deriv2;

  // Supplied norm bounds (conservative); estimates when is_bounded is false.
  double sup_value = 0;
  double sup_d1 = 0;
  double sup_d2 = 0;
  double hold_gamma_dk = 0;  // H_gamma(D^k f)
  bool is_bounded = true;    // false: linear-growth field admitted with local estimates

  int out_dim() const { return rows * cols; }

  Mat operator()(const Vec& y) const { return value(y); }

  /// Df(y) h as a flattened value-space vector; requires k >= 1.
  Vec d1_apply(const Vec& y, const Vec& h) const;
};

/// Max relative mismatch between analytic derivatives and central finite
/// differences over sampled points, orders 1..k.
double derivative_fd_check(const VectorField& f, int n_points, double box_half_width,
                           unsigned long long seed, double fd_eps = 1e-5);

/// Builtin registry addressed by "name:key=value,..." spec strings:
///   zero:dv=..,du=..          f = 0
///   const:dv=..,du=..,c=..    constant matrix c
///   linear:lambda=..          scalar f(y) = lambda y            (dv=du=1)
///   rotation:theta=..         planar f(y) = theta J y           (dv=2, du=1)
///   tanh:dv=..,du=..,scale=.. saturated C-infinity field, bounded
///   boundary:gamma=..,c=..    scalar f(y) = c |y|^{1+gamma}, k = 1
///   sin-map:d=..              componentwise sin, cols = 1
///   tanh-map:d=..,scale=..    componentwise tanh, cols = 1
///   id-map:d=..               identity, cols = 1
///   oddpow-map:gamma=..       scalar sign(y) |y|^gamma, k = 0
VectorField make_field(const std::string& spec);

/// Composition f(g(.)) for a plain-map g (cols = 1) feeding f; derivatives
/// chained analytically up to min availability.
VectorField compose_fields(const VectorField& f, const VectorField& g);

struct HoelderReport {
  double alpha = 0;
  double H_hat = 0;  // lower bound, monotone in n_pairs
  int n_pairs = 0;
};

/// max |f(x)-f(y)| / |x-y|^alpha over n random pairs in the box
/// [-box_half_width, box_half_width]^in_dim.
HoelderReport hoelder_seminorm_estimate(const VectorField& f, double alpha, double box_half_width,
                                        int n_pairs, unsigned long long seed);

/// Interpolation inequality: for quadruples (y, z, y', z'),
///   |g(z)-g(y)-g(z')+g(y')| <=
///   H (|y'-y|^{kg} + |z'-z|^{kg}) (|z'-y'|^{g(1-k)} + |z-y|^{g(1-k)}),
/// H the gamma-Hoelder seminorm. Returns max(LHS - RHS) over the sample;
/// nonpositive (up to seminorm slack) when H is exact.
double interpolation_check(const VectorField& g, double H_gamma, double gamma, double kappa,
                           int n_quadruples, double box_half_width, unsigned long long seed);

/// Pointwise composition on the grid: t -> f(y_t), flattened.
DiscretePath omega_map(const VectorField& f, const DiscretePath& y);

/// Pointwise first derivative: t -> Df(y_t) h_t; requires k >= 1.
DiscretePath omega_derivative(const VectorField& f, const DiscretePath& y, const DiscretePath& h);

struct OmegaProbe {
  double ratio = 0;  // ||Of(y)-Of(z)||_{q-var} / ||y-z||_{p-var}^{(1-kappa) gamma}
  double bound = 0;  // H_gamma(f) (1 + omega^{(1-kappa) gamma / p}) (||y||^{kg} + ||z||^{kg})
  bool holds = false;
};

/// Checks the local Hoelder continuity of the Omega map with q = p/(kappa*gamma).
OmegaProbe omega_hoelder_probe(const VectorField& f, double H_gamma, const DiscretePath& y,
                               const DiscretePath& z, double p, double kappa, double gamma,
                               const ControlFn& omega);

}  // namespace rp
