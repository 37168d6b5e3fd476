#pragma once

#include <functional>

#include "rp/grid.hpp"
#include "rp/linalg.hpp"

namespace rp {

/// Local germ Xi_{t_i,t_j} claimed to be almost additive: the coherence
/// defect Xi_{r,t} - Xi_{r,s} - Xi_{s,t} should be O(omega(r,t)^theta) with
/// theta > 1. Defects are measured, never enforced.
struct AdditiveGerm {
  std::function<Vec(int, int)> eval;
  double theta = 2.0;
  ControlFn omega;
};

/// Increment family built by the finest-mesh germ sum. Additivity
/// I_{r,t} = I_{r,s} + I_{s,t} holds by construction: values are differences
/// of compensated prefix sums.
class SewnAdditive {
 public:
  SewnAdditive(Grid grid, std::vector<Vec> prefix) : grid_(std::move(grid)), prefix_(std::move(prefix)) {}

  const Grid& grid() const { return grid_; }
  Vec value(int i, int j) const { return prefix_[static_cast<size_t>(j)] - prefix_[static_cast<size_t>(i)]; }

  /// Path started at 0: t_i -> I_{0,i}.
  DiscretePath path() const;

 private:
  Grid grid_;
  std::vector<Vec> prefix_;  // prefix_[i] = I_{0,i}
};

SewnAdditive sew_additive(const AdditiveGerm& germ, const Grid& grid);

/// sup |I_{s,t} - Xi_{s,t}| / omega(s,t)^theta over scanned pairs; the
/// measured constant of the sewing bound.
double sewing_gap_constant(const SewnAdditive& fam, const AdditiveGerm& germ);

/// Element of the monoid W = U + V + (U (x) V) with
/// (a,b,c) boxtimes (a',b',c') = (a+a', b+b', c+c'+a (x) b').
struct MonoidElem {
  Vec a, b;
  Mat c;

  MonoidElem() = default;
  MonoidElem(Vec a_, Vec b_, Mat c_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {}
  static MonoidElem identity(int du, int dv) {
    return MonoidElem(Vec(static_cast<size_t>(du), 0.0), Vec(static_cast<size_t>(dv), 0.0), Mat(du, dv));
  }

  /// max{|a|, |b|, |c|}, the norm used for all monoid diagnostics.
  double norm() const { return std::max({norm2(a), norm2(b), frob_norm(c)}); }
};

MonoidElem boxtimes(const MonoidElem& x, const MonoidElem& y);
MonoidElem box_inv(const MonoidElem& x);

/// Almost-multiplicative germ phi_{t_i,t_j} in W.
struct MultiplicativeGerm {
  std::function<MonoidElem(int, int)> eval;
  double theta = 2.0;
  ControlFn omega;
};

/// boxtimes-multiplicative family: Y_{r,s} boxtimes Y_{s,t} = Y_{r,t} by
/// construction (values are inv(prefix) boxtimes prefix; adjacent pairs
/// return the stored step germ).
class SewnMultiplicative {
 public:
  SewnMultiplicative(Grid grid, std::vector<MonoidElem> steps, std::vector<MonoidElem> prefix)
      : grid_(std::move(grid)), steps_(std::move(steps)), prefix_(std::move(prefix)) {}

  const Grid& grid() const { return grid_; }
  MonoidElem value(int i, int j) const;

 private:
  Grid grid_;
  std::vector<MonoidElem> steps_;
  std::vector<MonoidElem> prefix_;
};

SewnMultiplicative sew_multiplicative(const MultiplicativeGerm& germ, const Grid& grid);

/// sup |Y_{s,t} - phi_{s,t}| / omega^theta over scanned pairs.
double sewing_gap_constant(const SewnMultiplicative& fam, const MultiplicativeGerm& germ);

/// Least-squares fit of log|defect| against log omega(r,t) over midpoint
/// triples (i, (i+j)/2, j). When every defect sits at the floor the exponent
/// is reported as not identifiable.
struct DefectScan {
  double C_hat = 0;
  double theta_hat = 0;
  int n_triples = 0;
  double residual = 0;  // rms of the log-log fit
  bool identifiable = false;
};

DefectScan defect_scan(const AdditiveGerm& germ, const Grid& grid, int max_triples = 256);
DefectScan defect_scan(const MultiplicativeGerm& germ, const Grid& grid, int max_triples = 256);

}  // namespace rp
