#pragma once

#include <memory>
#include <vector>

#include "rp/grid.hpp"
#include "rp/linalg.hpp"

namespace rp {

/// Element of the level-2 truncated tensor group over R^d: scalar part is
/// implicitly 1, level1 in R^d, level2 in R^{d x d}. No symmetry constraint
/// is imposed on level2, so non-geometric elements are first-class.
struct Tensor2 {
  Vec level1;
  Mat level2;

  Tensor2() = default;
  explicit Tensor2(int d) : level1(static_cast<size_t>(d), 0.0), level2(d, d) {}
  Tensor2(Vec v, Mat m) : level1(std::move(v)), level2(std::move(m)) {}

  int dim() const { return static_cast<int>(level1.size()); }
  static Tensor2 identity(int d) { return Tensor2(d); }

  /// max(|level1|_2, |level2|_F); used by defect diagnostics.
  double norm() const { return std::max(norm2(level1), frob_norm(level2)); }
};

/// Truncated tensor product: (v,M) * (v',M') = (v+v', M+M'+v (x) v').
Tensor2 tensor_mul(const Tensor2& a, const Tensor2& b);

/// Group inverse: (v,M)^{-1} = (-v, -M + v (x) v).
Tensor2 tensor_inv(const Tensor2& a);

/// Level-2 rough path on a grid. Only consecutive-step increments are
/// stored; every other increment is reconstructed from the running products
/// x_{0,i}, so the multiplicative (Chen) property
///   x_{i,k} = x_{i,j} * x_{j,k}
/// holds by construction: increment(i,j) := inv(x_{0,i}) * x_{0,j}.
class RoughPath {
 public:
  RoughPath() = default;
  RoughPath(Grid grid, Vec start, std::vector<Tensor2> step_increments, double p,
            ControlFn omega = ControlFn());

  int dim() const { return dim_; }
  double p() const { return p_; }
  const Grid& grid() const { return grid_; }
  const ControlFn& control() const { return control_; }
  const Vec& start() const { return start_; }
  const std::vector<Tensor2>& steps() const { return steps_; }

  Tensor2 increment(int i, int j) const;
  Vec level1(int i, int j) const;  // x^1_{t_i,t_j} from the level1 prefix

  /// Underlying path values: start + telescoped level1.
  DiscretePath path() const;

 private:
  Grid grid_;
  Vec start_;
  std::vector<Tensor2> steps_;    // steps_[k] spans [t_k, t_{k+1}]
  std::vector<Tensor2> prefix_;   // prefix_[i] = x_{0,i}; prefix_[0] = identity
  double p_ = 2.0;
  ControlFn control_;
  int dim_ = 0;
};

struct RoughNorm {
  double level1 = 0;  // sup |x^1_{s,t}| / omega^{1/p}
  double level2 = 0;  // sup (|x^2_{s,t}| / omega^{2/p})^{1/2}
  double value = 0;   // max of the two (homogeneous convention)
};

/// ||x||_p over scanned grid pairs. The level-2 part uses the square-root
/// convention so that dilation scales the norm linearly.
RoughNorm rough_norm(const RoughPath& x);

/// Dilation d_eps: step (v, M) -> (eps v, eps^2 M). Group homomorphism, so
/// Chen is preserved.
RoughPath dilate(const RoughPath& x, double eps);

/// Translation x(h): level1 gains h's increments; level2 gains the cross
/// Young integrals int h (x) dx + int x (x) dh + int h (x) dh, evaluated per
/// step with the one-term trapezoid germ (exact for piecewise-linear data;
/// refined under grid refinement). Requires 1/p + 1/q > 1.
RoughPath translate(const RoughPath& x, const DiscretePath& h, double q);

/// Max Chen defect |increment(i,k) - increment(i,j)*increment(j,k)| over
/// sampled triples; ~machine precision for internally constructed paths.
double chen_defect(const RoughPath& x, int n_triples = 512);

}  // namespace rp
