#pragma once

#include <memory>

#include "rp/fields.hpp"
#include "rp/sewing.hpp"
#include "rp/tensor.hpp"

namespace rp {

/// Variation indices of a controlled rough path: the dagger has finite
/// q-variation and the remainder has finite omega^{1/r}-rate. Solver entry
/// points pin (q, r) = (p, p/2).
struct CrpIndices {
  double p = 2.0, q = 2.0, r = 1.0;

  /// theta = min(2/p + 1/q, 1/p + 1/r); the sewing exponent of the flat map.
  double theta() const { return std::min(2.0 / p + 1.0 / q, 1.0 / p + 1.0 / r); }
};

/// Controlled rough path (y, y-dagger) over a reference rough path x.
/// Values live in R^{rows x cols}, stored flattened (cols > 1 means the path
/// is L(W,V)-valued and can act as an integrand). The dagger at each instant
/// is a linear map from the base space R^{dU} to the value space.
/// The remainder y#_{s,t} = y_{s,t} - y-dag_s x^1_{s,t} is always derived,
/// never stored.
class ControlledPath {
 public:
  ControlledPath() = default;
  ControlledPath(std::shared_ptr<const RoughPath> base, std::vector<Vec> y, std::vector<Mat> ydag,
                 int rows, int cols, CrpIndices idx);

  const RoughPath& x() const { return *base_; }
  const std::shared_ptr<const RoughPath>& base() const { return base_; }
  const Grid& grid() const { return base_->grid(); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int value_dim() const { return rows_ * cols_; }
  const CrpIndices& indices() const { return idx_; }
  CrpIndices& indices() { return idx_; }

  const std::vector<Vec>& values() const { return y_; }
  const std::vector<Mat>& daggers() const { return ydag_; }
  std::vector<Vec>& values() { return y_; }
  std::vector<Mat>& daggers() { return ydag_; }

  Vec value_increment(int i, int j) const { return y_[static_cast<size_t>(j)] - y_[static_cast<size_t>(i)]; }

  /// y#_{t_i,t_j} = y_{i,j} - ydag_i x^1_{i,j}.
  Vec remainder(int i, int j) const;

  /// Interprets the value at instant i as its rows x cols matrix.
  Mat value_as_mat(int i) const;

 private:
  std::shared_ptr<const RoughPath> base_;
  std::vector<Vec> y_;
  std::vector<Mat> ydag_;
  int rows_ = 0, cols_ = 1;
  CrpIndices idx_;
};

/// The path of x itself controlled by x: y-dag = Id, remainder = 0.
ControlledPath canonical_crp(std::shared_ptr<const RoughPath> base);

/// Constant controlled path (zero dagger).
ControlledPath constant_crp(std::shared_ptr<const RoughPath> base, const Vec& value, int rows,
                            int cols, CrpIndices idx);

struct CrpNorms {
  double dag_q = 0;      // ||ydag||_q
  double sharp_r = 0;    // ||y#||_r
  double norm_x = 0;     // dag_q + sharp_r
  double norm_x_full = 0;  // |y_0| + |ydag_0| + norm_x
  // Slack (rhs - lhs, >= 0) of the three displayed norm inequalities:
  // sup|ydag|, ||y||_p, sup|y| against their ||.||_{x,full} bounds.
  double slack_dag_sup = 0;
  double slack_y_pvar = 0;
  double slack_y_sup = 0;
};

CrpNorms crp_norms(const ControlledPath& Y);

/// Distance of two controlled paths over the same base in the full norm:
/// |dy_0| + |dydag_0| + ||dydag||_q + ||d y#||_r.
double crp_distance(const ControlledPath& A, const ControlledPath& B);

/// The y-flat family: multiplicative sewing of the germ
/// (x^1_{s,t}, y_{s,t}, ydag_s x^2_{s,t}) in U + V + (U (x) V); values in
/// R^{dU x m}. The cocycle
///   yflat_{r,s} + yflat_{s,t} + x^1_{r,s} (x) y_{s,t} = yflat_{r,t}
/// holds by construction.
class FlatFamily {
 public:
  FlatFamily(std::shared_ptr<const RoughPath> base, SewnMultiplicative sewn)
      : base_(std::move(base)), sewn_(std::move(sewn)) {}

  Mat value(int i, int j) const { return sewn_.value(i, j).c; }
  const SewnMultiplicative& sewn() const { return sewn_; }

 private:
  std::shared_ptr<const RoughPath> base_;
  SewnMultiplicative sewn_;
};

/// Requires theta = min(2/p + 1/q, 1/p + 1/r) > 1.
FlatFamily flat(const ControlledPath& Y);

/// Measured constant of |yflat_{s,t} - ydag_s x^2_{s,t}| <=
/// K ||y||_x (||x||_p v ||x||_p^2) omega^theta over scanned pairs.
double flat_bound_check(const FlatFamily& fam, const ControlledPath& Y);

/// Rough integral of the L(W,V)-valued CRP Y against the W-valued CRP Z over
/// the same base, built by additive sewing of the germ
///   y_s z_{s,t} + ydag_s zflat_{s,t}.
/// Starts at 0; the dagger of the result is y_s zdag_s; output indices
/// (p, p v q_Z, p/2).
ControlledPath crp_integral(const ControlledPath& Y, const ControlledPath& Z);

struct CrpIntegralReport {
  double K_compensated = 0;  // measured constant of the local bound
  double K_norm = 0;         // measured constant of the norm bound
};

CrpIntegralReport crp_integral_check(const ControlledPath& Y, const ControlledPath& Z);

enum class CrpProductMode { compose_linear, tensor };

/// Pointwise product with the Leibniz dagger (yz)-dag = ydag z + y zdag.
/// compose_linear: L(W,V)-valued times W-valued; tensor: outer product.
ControlledPath crp_product(const ControlledPath& Y, const ControlledPath& Z, CrpProductMode mode);

/// Omega map on CRPs: value f(y_t), dagger Df(y_t) ydag_t. Output indices
/// follow the Q-space bookkeeping (p, (q v p)/(kappa gamma), r v p/(1+kappa gamma)).
ControlledPath crp_omega(const VectorField& f, const ControlledPath& Y, double kappa = 1.0);

/// Max mismatch over sampled pairs between the remainder of crp_omega(f, Y)
/// and the first-order Taylor formula
///   Df(y_s) y#_{s,t} + int_0^1 (Df(y_s + u y_{s,t}) - Df(y_s)) y_{s,t} du.
double crp_omega_remainder_check(const VectorField& f, const ControlledPath& Y, int n_pairs = 128);

}  // namespace rp
