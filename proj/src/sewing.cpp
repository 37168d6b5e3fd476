#include "rp/sewing.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rp {

namespace {

// OLS fit of y = b0 + b1 x; returns {b0, b1, rms residual}.
struct Fit {
  double intercept = 0, slope = 0, rms = 0;
};

Fit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  Fit f;
  const double denom = n * sxx - sx * sx;
  f.slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

// Midpoint triples (i, i+k, i+2k) spread across scales and positions.
std::vector<std::array<int, 3>> midpoint_triples(int n_instants, int max_triples) {
  std::vector<std::array<int, 3>> out;
  const int n_steps = n_instants - 1;
  for (int k = 1; 2 * k <= n_steps; k *= 2) {
    const int span = 2 * k;
    const int max_start = n_steps - span;
    const int stride = std::max(1, max_start / 8 + 1);
    for (int i = 0; i <= max_start; i += stride) {
      out.push_back({i, i + k, i + span});
      if (static_cast<int>(out.size()) >= max_triples) return out;
    }
  }
  return out;
}

double elem_norm(const Vec& v) { return norm2(v); }
double elem_norm(const MonoidElem& m) { return m.norm(); }

template <class GermT, class DefectFn>
DefectScan scan_impl(const GermT& germ, const Grid& grid, int max_triples, DefectFn&& defect_of) {
  const auto triples = midpoint_triples(grid.size(), max_triples);
  if (static_cast<int>(triples.size()) < 3) throw RegimeError("defect_scan: fewer than 3 usable triples");
  std::vector<double> lx, ly;
  double scale = 0;
  for (const auto& tr : triples) scale = std::max(scale, elem_norm(germ.eval(tr[0], tr[2])));
  const double floor = 1e-13 * (1 + scale);
  DefectScan rep;
  rep.n_triples = static_cast<int>(triples.size());
  for (const auto& tr : triples) {
    const double d = defect_of(tr[0], tr[1], tr[2]);
    const double w = germ.omega(grid.t(tr[0]), grid.t(tr[2]));
    if (d > floor && w > 0) {
      lx.push_back(std::log(w));
      ly.push_back(std::log(d));
    }
  }
  if (lx.size() < 3) {
    rep.identifiable = false;  // defects at the numerical floor
    return rep;
  }
  const Fit f = ols(lx, ly);
  rep.identifiable = true;
  rep.theta_hat = f.slope;
  rep.C_hat = std::exp(f.intercept);
  rep.residual = f.rms;
  return rep;
}

}  // namespace

DiscretePath SewnAdditive::path() const {
  DiscretePath out(grid_, static_cast<int>(prefix_.front().size()));
  for (int i = 0; i < grid_.size(); ++i) out.values[static_cast<size_t>(i)] = prefix_[static_cast<size_t>(i)];
  return out;
}

SewnAdditive sew_additive(const AdditiveGerm& germ, const Grid& grid) {
  const Vec first = germ.eval(0, 1);
  const size_t dim = first.size();
  std::vector<KahanSum> acc(dim);
  std::vector<Vec> prefix;
  prefix.reserve(static_cast<size_t>(grid.size()));
  prefix.emplace_back(dim, 0.0);
  for (int k = 0; k < grid.steps(); ++k) {
    const Vec xi = k == 0 ? first : germ.eval(k, k + 1);
    if (xi.size() != dim) throw DimensionError("sew_additive: germ dimension changed");
    Vec row(dim);
    for (size_t c = 0; c < dim; ++c) {
      acc[c].add(xi[c]);
      row[c] = acc[c].value();
    }
    prefix.push_back(std::move(row));
  }
  return SewnAdditive(grid, std::move(prefix));
}

double sewing_gap_constant(const SewnAdditive& fam, const AdditiveGerm& germ) {
  double worst = 0;
  const Grid& g = fam.grid();
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double w = germ.omega(g.t(i), g.t(j));
    if (w <= 0) return;
    const double gap = norm2(fam.value(i, j) - germ.eval(i, j));
    worst = std::max(worst, gap / std::pow(w, germ.theta));
  });
  return worst;
}

MonoidElem boxtimes(const MonoidElem& x, const MonoidElem& y) {
  if (x.a.size() != y.a.size() || x.b.size() != y.b.size())
    throw DimensionError("boxtimes: dimension mismatch");
  return MonoidElem(x.a + y.a, x.b + y.b, x.c + y.c + outer(x.a, y.b));
}

MonoidElem box_inv(const MonoidElem& x) {
  MonoidElem out;
  out.a = -1.0 * x.a;
  out.b = -1.0 * x.b;
  out.c = outer(x.a, x.b) - x.c;
  return out;
}

MonoidElem SewnMultiplicative::value(int i, int j) const {
  if (i < 0 || j < i || j >= grid_.size()) throw InvalidGridError("sewn value: index out of range");
  if (i == j) {
    const MonoidElem& p = prefix_.front();
    return MonoidElem::identity(static_cast<int>(p.a.size()), static_cast<int>(p.b.size()));
  }
  if (j == i + 1) return steps_[static_cast<size_t>(i)];
  return boxtimes(box_inv(prefix_[static_cast<size_t>(i)]), prefix_[static_cast<size_t>(j)]);
}

SewnMultiplicative sew_multiplicative(const MultiplicativeGerm& germ, const Grid& grid) {
  std::vector<MonoidElem> steps;
  steps.reserve(static_cast<size_t>(grid.steps()));
  for (int k = 0; k < grid.steps(); ++k) steps.push_back(germ.eval(k, k + 1));
  std::vector<MonoidElem> prefix;
  prefix.reserve(static_cast<size_t>(grid.size()));
  prefix.push_back(MonoidElem::identity(static_cast<int>(steps.front().a.size()),
                                        static_cast<int>(steps.front().b.size())));
  for (const MonoidElem& s : steps) prefix.push_back(boxtimes(prefix.back(), s));
  return SewnMultiplicative(grid, std::move(steps), std::move(prefix));
}

double sewing_gap_constant(const SewnMultiplicative& fam, const MultiplicativeGerm& germ) {
  double worst = 0;
  const Grid& g = fam.grid();
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double w = germ.omega(g.t(i), g.t(j));
    if (w <= 0) return;
    const MonoidElem y = fam.value(i, j);
    const MonoidElem phi = germ.eval(i, j);
    const double gap = std::max({norm2(y.a - phi.a), norm2(y.b - phi.b), frob_norm(y.c - phi.c)});
    worst = std::max(worst, gap / std::pow(w, germ.theta));
  });
  return worst;
}

DefectScan defect_scan(const AdditiveGerm& germ, const Grid& grid, int max_triples) {
  return scan_impl(germ, grid, max_triples, [&](int r, int s, int t) {
    return norm2(germ.eval(r, t) - germ.eval(r, s) - germ.eval(s, t));
  });
}

DefectScan defect_scan(const MultiplicativeGerm& germ, const Grid& grid, int max_triples) {
  return scan_impl(germ, grid, max_triples, [&](int r, int s, int t) {
    const MonoidElem composed = boxtimes(germ.eval(r, s), germ.eval(s, t));
    const MonoidElem direct = germ.eval(r, t);
    return std::max({norm2(composed.a - direct.a), norm2(composed.b - direct.b),
                     frob_norm(composed.c - direct.c)});
  });
}

}  // namespace rp
