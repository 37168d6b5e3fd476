#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rp/tensor.hpp"

namespace rp {

/// Test-path constructor configuration. Parsed from CLI spec strings such as
/// "fbm:H=0.4,d=2,N=4096,seed=7".
struct DriverSpec {
  enum class Kind { smooth_sin, smooth_poly, bm, fbm, pure_area };

  Kind kind = Kind::smooth_sin;
  int d = 1;
  int N = 1 << 10;
  double horizon = 1.0;
  double H = 0.5;              // Hurst index, fbm only
  std::uint64_t seed = 7;
  std::map<std::string, double> params;  // kind-specific coefficients

  static DriverSpec parse(const std::string& spec);
  std::string canonical_string() const;
};

/// Evaluates the closed-form smooth path (sinusoids or monomials) of the
/// spec on a uniform grid.
DiscretePath smooth_path(const DriverSpec& spec);

/// d independent fBm components on a uniform grid of N steps (N a power of
/// two), exact in law via circulant embedding of fractional Gaussian noise;
/// falls back to Cholesky for N <= 2^11 if the embedding is not nonnegative.
/// Deterministic given (seed, component index).
DiscretePath sample_fbm(const DriverSpec& spec);

/// Brownian motion: fBm with H = 1/2 (independent Gaussian increments).
DiscretePath sample_bm(const DriverSpec& spec);

/// The Cholesky fallback sampler (N <= 2^11) runnable directly; same law as
/// the circulant route, different draws. Used to cross-check the embedding.
DiscretePath sample_fbm_cholesky(const DriverSpec& spec);

/// Level-2 lift of a discrete path: per segment level2 = 1/2 v (x) v, the
/// exact iterated integral of a linear segment.
RoughPath lift_piecewise_linear(const DiscretePath& x, double p, ControlFn omega = ControlFn());

/// Non-geometric rough path with zero level1 and step level2 = c*(t_{i+1}-t_i)*A,
/// A antisymmetric.
RoughPath pure_area(const Mat& A, double c, const Grid& grid, double p = 2.0,
                    ControlFn omega = ControlFn());

/// Builds the driver's rough path: piecewise-linear lift for path-like kinds,
/// the pure-area construction otherwise. p defaults by kind (fbm: slightly
/// above 1/H, clamped to [2,3)).
RoughPath make_rough_driver(const DriverSpec& spec, double p);

}  // namespace rp
