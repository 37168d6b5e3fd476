#include "rp/grid.hpp"

#include <algorithm>
#include <cmath>

#include "rp/rng.hpp"

namespace rp {

Grid::Grid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw InvalidGridError("grid needs at least 2 instants");
  if (times_.front() != 0.0) throw InvalidGridError("grid must start at t = 0");
  for (size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw InvalidGridError("grid must be strictly increasing");
}

Grid Grid::uniform(double horizon, int n_steps) {
  if (n_steps < 1 || horizon <= 0) throw InvalidGridError("uniform grid: bad parameters");
  std::vector<double> ts(static_cast<size_t>(n_steps) + 1);
  for (int i = 0; i <= n_steps; ++i) ts[static_cast<size_t>(i)] = horizon * i / n_steps;
  ts.back() = horizon;
  return Grid(std::move(ts));
}

Grid Grid::refine() const {
  std::vector<double> ts;
  ts.reserve(times_.size() * 2 - 1);
  for (size_t i = 0; i + 1 < times_.size(); ++i) {
    ts.push_back(times_[i]);
    ts.push_back(0.5 * (times_[i] + times_[i + 1]));
  }
  ts.push_back(times_.back());
  return Grid(std::move(ts));
}

Grid Grid::coarsen(int stride) const {
  if (stride < 1) throw InvalidGridError("coarsen: stride must be >= 1");
  std::vector<double> ts;
  for (size_t i = 0; i < times_.size(); i += static_cast<size_t>(stride)) ts.push_back(times_[i]);
  if (ts.back() != times_.back()) ts.push_back(times_.back());
  return Grid(std::move(ts));
}

double ControlFn::validate(double horizon, int n_triples, unsigned long long seed) const {
  CounterRng rng(seed, /*stream=*/0x636f6e74726f6cULL);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_triples; ++k) {
    double a = rng.uniform() * horizon;
    double b = rng.uniform() * horizon;
    double c = rng.uniform() * horizon;
    double r = std::min({a, b, c}), t = std::max({a, b, c});
    double s = a + b + c - r - t;
    worst = std::max(worst, (*this)(r, s) + (*this)(s, t) - (*this)(r, t));
    worst = std::max(worst, std::abs((*this)(s, s)));
  }
  return worst;
}

DiscretePath::DiscretePath(Grid g, int d)
    : grid(std::move(g)), dim(d), values(static_cast<size_t>(grid.size()), Vec(static_cast<size_t>(d), 0.0)) {}

void DiscretePath::check() const {
  if (static_cast<int>(values.size()) != grid.size())
    throw InvalidGridError("path: value count does not match grid");
  for (const Vec& v : values)
    if (static_cast<int>(v.size()) != dim) throw DimensionError("path: inconsistent value dimension");
}

Vec DiscretePath::increment(int i, int j) const {
  return values[static_cast<size_t>(j)] - values[static_cast<size_t>(i)];
}

DiscretePath DiscretePath::subsample(int stride) const {
  DiscretePath out;
  out.grid = grid.coarsen(stride);
  out.dim = dim;
  for (size_t i = 0; i < values.size(); i += static_cast<size_t>(stride)) out.values.push_back(values[i]);
  if (out.values.size() != static_cast<size_t>(out.grid.size())) out.values.push_back(values.back());
  return out;
}

DiscretePath zero_path(const Grid& g, int dim) { return DiscretePath(g, dim); }

DiscretePath interpolate_to(const DiscretePath& x, const Grid& target) {
  x.check();
  if (target.horizon() > x.grid.horizon() + 1e-12)
    throw InvalidGridError("interpolate_to: target grid exceeds source horizon");
  DiscretePath out(target, x.dim);
  int k = 0;
  for (int i = 0; i < target.size(); ++i) {
    double t = target.t(i);
    while (k + 1 < x.grid.size() && x.grid.t(k + 1) <= t) ++k;
    if (k + 1 >= x.grid.size() || x.grid.t(k) == t) {
      out.values[static_cast<size_t>(i)] = x.values[static_cast<size_t>(std::min(k, x.grid.size() - 1))];
    } else {
      double w = (t - x.grid.t(k)) / (x.grid.t(k + 1) - x.grid.t(k));
      Vec v = x.values[static_cast<size_t>(k)];
      axpy(w, x.values[static_cast<size_t>(k + 1)] - x.values[static_cast<size_t>(k)], v);
      out.values[static_cast<size_t>(i)] = std::move(v);
    }
  }
  return out;
}

bool scan_is_exact(int n_instants) { return n_instants <= kExactScanLimit; }

void for_each_scan_pair(int n, const std::function<void(int, int)>& fn) {
  if (scan_is_exact(n)) {
    for (int i = 0; i + 1 < n; ++i)
      for (int j = i + 1; j < n; ++j) fn(i, j);
  } else {
    for (int i = 0; i + 1 < n; ++i)
      for (int step = 1; i + step < n; step *= 2) fn(i, i + step);
  }
}

double pvar_norm(const DiscretePath& x, double p, const ControlFn& omega) {
  x.check();
  if (p < 1) throw RegimeError("pvar_norm: p must be >= 1");
  if (x.grid.size() < 2) throw InvalidGridError("pvar_norm: need at least 2 instants");
  double best = 0;
  bool infinite = false;
  for_each_scan_pair(x.grid.size(), [&](int i, int j) {
    const double w = omega(x.grid.t(i), x.grid.t(j));
    const double inc = norm2(x.increment(i, j));
    if (w <= 0) {
      if (inc > 0) infinite = true;
      return;
    }
    best = std::max(best, inc / std::pow(w, 1.0 / p));
  });
  if (infinite) return std::numeric_limits<double>::infinity();
  return best;
}

double full_norm(const DiscretePath& x, double p, const ControlFn& omega) {
  return norm2(x.values.front()) + pvar_norm(x, p, omega);
}

EmbeddingReport sup_embedding_check(const DiscretePath& x, double p, const ControlFn& omega) {
  double sup = 0;
  for (const Vec& v : x.values) sup = std::max(sup, norm2(v));
  const double bound = norm2(x.values.front()) +
                       pvar_norm(x, p, omega) * std::pow(omega(0.0, x.grid.horizon()), 1.0 / p);
  EmbeddingReport rep;
  rep.slack = bound - sup;
  rep.holds = rep.slack >= -1e-12 * (1 + bound);
  return rep;
}

}  // namespace rp
