#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rp/linalg.hpp"

namespace rp {

/// Time grid 0 = t_0 < t_1 < ... < t_N = T.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<double> times);

  /// Uniform grid with n_steps intervals on [0, horizon].
  static Grid uniform(double horizon, int n_steps);

  int size() const { return static_cast<int>(times_.size()); }       // instants
  int steps() const { return static_cast<int>(times_.size()) - 1; }  // intervals
  double horizon() const { return times_.back(); }
  double t(int i) const { return times_[static_cast<size_t>(i)]; }
  const std::vector<double>& times() const { return times_; }

  /// Dyadic refinement: inserts the midpoint of every interval.
  Grid refine() const;

  /// Keeps every stride-th instant (last instant always kept).
  Grid coarsen(int stride) const;

  bool operator==(const Grid& o) const { return times_ == o.times_; }

 private:
  std::vector<double> times_;
};

/// Super-additive control function omega(s,t) on sub-intervals of [0,T].
/// The default is the difference control omega = t - s.
class ControlFn {
 public:
  enum class Kind { difference, user };

  ControlFn() : kind_(Kind::difference) {}
  explicit ControlFn(std::function<double(double, double)> eval)
      : kind_(Kind::user), eval_(std::move(eval)) {}

  double operator()(double s, double t) const {
    return kind_ == Kind::difference ? t - s : eval_(s, t);
  }
  Kind kind() const { return kind_; }

  /// Samples random triples r <= s <= t and checks omega(r,s)+omega(s,t) <=
  /// omega(r,t) and omega(t,t) = 0. Returns the worst super-additivity
  /// violation (<= 0 when the control is valid up to roundoff).
  double validate(double horizon, int n_triples, unsigned long long seed) const;

 private:
  Kind kind_;
  std::function<double(double, double)> eval_;
};

/// Path sampled on a grid, values in R^d.
struct DiscretePath {
  Grid grid;
  int dim = 0;
  std::vector<Vec> values;  // one per grid instant

  DiscretePath() = default;
  DiscretePath(Grid g, int d);

  void check() const;
  Vec increment(int i, int j) const;  // x_{t_i,t_j} = x_j - x_i

  /// Restriction to every stride-th instant.
  DiscretePath subsample(int stride) const;
};

/// Zero path on a grid.
DiscretePath zero_path(const Grid& g, int dim);

/// Linear interpolation of `x` onto `target`, which must contain x's grid
/// horizon. Used to move a Young integrand to a finer grid; integrators are
/// never interpolated.
DiscretePath interpolate_to(const DiscretePath& x, const Grid& target);

/// Pair-scan policy: exact O(N^2) scan of all grid pairs for N <= 4096
/// instants, dyadic pairs (i, i + 2^k) beyond. Beyond the exact range the
/// resulting norms are lower bounds.
inline constexpr int kExactScanLimit = 4096;
bool scan_is_exact(int n_instants);

/// Invokes fn(i, j) for every pair selected by the scan policy, i < j.
void for_each_scan_pair(int n_instants, const std::function<void(int, int)>& fn);

/// sup |x_{t_i,t_j}| / omega(t_i,t_j)^{1/p} over scanned pairs.
/// omega = 0 with a nonzero increment yields +infinity.
double pvar_norm(const DiscretePath& x, double p, const ControlFn& omega);

/// |x_0| + pvar_norm(x, p, omega).
double full_norm(const DiscretePath& x, double p, const ControlFn& omega);

struct EmbeddingReport {
  bool holds = false;
  double slack = 0;  // bound - sup|x_t|
};

/// Checks sup_t |x_t| <= |x_0| + pvar_norm * omega(0,T)^{1/p}.
EmbeddingReport sup_embedding_check(const DiscretePath& x, double p, const ControlFn& omega);

}  // namespace rp
