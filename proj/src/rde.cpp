#include "rp/rde.hpp"

#include <algorithm>
#include <cmath>

#include "rp/rng.hpp"

namespace rp {

namespace {

constexpr double kStallScale = 5e-14;

double d1_sup_estimate(const VectorField& f, const Vec& center, double radius) {
  if (f.sup_d1 > 0) return f.sup_d1;
  if (f.k < 1) return 0.0;
  CounterRng rng(0x647375ULL, 3);
  double worst = 0;
  for (int it = 0; it < 64; ++it) {
    Vec y = center;
    for (double& v : y) v += radius * (2 * rng.uniform() - 1);
    worst = std::max(worst, frob_norm(f.deriv1(y)));
  }
  return worst;
}

// pvar over a window, values indexed locally from grid index i0.
double span_pvar(const std::vector<Vec>& vals, const Grid& g, int i0, double exponent,
                 const ControlFn& w) {
  const int n = static_cast<int>(vals.size());
  double best = 0;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double om = w(g.t(i0 + i), g.t(i0 + j));
      if (om <= 0) continue;
      best = std::max(best, norm2(vals[static_cast<size_t>(j)] - vals[static_cast<size_t>(i)]) /
                                std::pow(om, 1.0 / exponent));
    }
  return best;
}

struct WindowPlan {
  int i0, i1;
};

// Greedy abutting windows: largest i1 with factor * omega^{1/p} < safety.
std::vector<WindowPlan> plan_windows(const Grid& g, int i0, int i1, double factor, double p,
                                     const ControlFn& w, double safety, bool stack) {
  std::vector<WindowPlan> plan;
  if (!stack || factor <= 0) {
    plan.push_back({i0, i1});
    return plan;
  }
  int lo = i0;
  while (lo < i1) {
    int hi = lo + 1;
    while (hi < i1 && factor * std::pow(w(g.t(lo), g.t(hi + 1)), 1.0 / p) < safety) ++hi;
    plan.push_back({lo, hi});
    lo = hi;
  }
  return plan;
}

// Everything one Picard window needs; Young-only problems leave Z null.
struct Problem {
  // Rough part.
  const VectorField* f = nullptr;
  const Mat* bmat = nullptr;
  const ControlledPath* Z = nullptr;
  const FlatFamily* zflat = nullptr;
  // Young part (drift g dh for mixed, or the whole equation for solve_young).
  const VectorField* g = nullptr;
  const DiscretePath* h = nullptr;
  const DiscretePath* b = nullptr;  // additive forcing path (Young regime)

  const Grid* grid = nullptr;
  const ControlFn* omega = nullptr;
  double p = 2;
  bool rough() const { return Z != nullptr; }
};

void picard_pass(const Problem& pr, int i0, int n, const Vec& a_win, const std::vector<Vec>& y,
                 std::vector<Vec>& next_y, std::vector<Mat>& next_dag) {
  const int dim = static_cast<int>(a_win.size());
  std::vector<Vec> germs(static_cast<size_t>(n - 1), Vec(static_cast<size_t>(dim), 0.0));

  if (pr.rough()) {
    const VectorField& f = *pr.f;
    const ControlledPath& Z = *pr.Z;
    const int dv = f.in_dim, dw = f.cols;
    const bool forced = pr.bmat && !pr.bmat->empty();
    std::vector<Mat> fy(static_cast<size_t>(n)), fdag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      fy[static_cast<size_t>(i)] = f.value(y[static_cast<size_t>(i)]);
      // Gubinelli derivative of f(y) along the iterate: Df(y) (f(y) + b) zdag.
      Mat ydag = fy[static_cast<size_t>(i)];
      if (forced) ydag += *pr.bmat;
      ydag = matmul(ydag, Z.daggers()[static_cast<size_t>(i0 + i)]);
      fdag[static_cast<size_t>(i)] = matmul(f.deriv1(y[static_cast<size_t>(i)]), ydag);
    }
    for (int k = 0; k < n - 1; ++k) {
      const Vec dz = Z.value_increment(i0 + k, i0 + k + 1);
      Vec& germ = germs[static_cast<size_t>(k)];
      germ = matvec(fy[static_cast<size_t>(k)], dz);
      const Mat zf = pr.zflat->value(i0 + k, i0 + k + 1);
      for (int v = 0; v < dv; ++v) {
        double s = 0;
        for (int w = 0; w < dw; ++w)
          for (int u = 0; u < zf.rows(); ++u)
            s += fdag[static_cast<size_t>(k)](v * dw + w, u) * zf(u, w);
        germ[static_cast<size_t>(v)] += s;
      }
      if (forced) germ = germ + matvec(*pr.bmat, dz);
    }
    next_dag.resize(static_cast<size_t>(n));
  } else {
    next_dag.clear();
  }

  if (pr.g && pr.h) {
    // Young contribution with the trapezoid germ.
    std::vector<Mat> gy(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) gy[static_cast<size_t>(i)] = pr.g->value(y[static_cast<size_t>(i)]);
    for (int k = 0; k < n - 1; ++k) {
      const Vec dh = pr.h->increment(i0 + k, i0 + k + 1);
      const Vec young = matvec(gy[static_cast<size_t>(k)] + gy[static_cast<size_t>(k + 1)], dh);
      axpy(0.5, young, germs[static_cast<size_t>(k)]);
    }
  }
  if (pr.b && !pr.b->values.empty()) {
    for (int k = 0; k < n - 1; ++k)
      germs[static_cast<size_t>(k)] = germs[static_cast<size_t>(k)] + pr.b->increment(i0 + k, i0 + k + 1);
  }

  next_y.assign(static_cast<size_t>(n), a_win);
  std::vector<KahanSum> acc(static_cast<size_t>(dim));
  for (int k = 0; k < n - 1; ++k) {
    Vec& row = next_y[static_cast<size_t>(k + 1)];
    for (int c = 0; c < dim; ++c) {
      acc[static_cast<size_t>(c)].add(germs[static_cast<size_t>(k)][static_cast<size_t>(c)]);
      row[static_cast<size_t>(c)] = a_win[static_cast<size_t>(c)] + acc[static_cast<size_t>(c)].value();
    }
  }

  if (pr.rough()) {
    const bool forced = pr.bmat && !pr.bmat->empty();
    for (int i = 0; i < n; ++i) {
      Mat v = pr.f->value(next_y[static_cast<size_t>(i)]);
      if (forced) v += *pr.bmat;
      next_dag[static_cast<size_t>(i)] = matmul(v, pr.Z->daggers()[static_cast<size_t>(i0 + i)]);
    }
  }
}

// Residual of one Picard update in the window's fixed-point metric:
// p-variation for the Young regime, the (q, r) = (p, p/2) full norm for the
// rough regime.
double window_residual(const Problem& pr, int i0, const std::vector<Vec>& y_new,
                       const std::vector<Vec>& y_old, const std::vector<Mat>& dag_new,
                       const std::vector<Mat>& dag_old) {
  const int n = static_cast<int>(y_new.size());
  const Grid& g = *pr.grid;
  const ControlFn& w = *pr.omega;
  std::vector<Vec> dy(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    dy[static_cast<size_t>(i)] = y_new[static_cast<size_t>(i)] - y_old[static_cast<size_t>(i)];
  if (!pr.rough()) return span_pvar(dy, g, i0, pr.p, w);

  const RoughPath& x = pr.Z->x();
  const double q = pr.p, r = pr.p / 2.0;
  std::vector<Vec> ddag(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ddag[static_cast<size_t>(i)] = dag_new[static_cast<size_t>(i)].data();
    const auto& od = dag_old[static_cast<size_t>(i)].data();
    for (size_t c = 0; c < ddag[static_cast<size_t>(i)].size(); ++c)
      ddag[static_cast<size_t>(i)][c] -= od[c];
  }
  double resid = norm2(ddag.front()) + span_pvar(ddag, g, i0, q, w);
  for (int i = 0; i + 1 < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double om = w(g.t(i0 + i), g.t(i0 + j));
      if (om <= 0) continue;
      Vec sharp = dy[static_cast<size_t>(j)] - dy[static_cast<size_t>(i)];
      const Vec x1 = x.level1(i0 + i, i0 + j);
      const Mat& di = dag_new[static_cast<size_t>(i)];
      const Mat& oi = dag_old[static_cast<size_t>(i)];
      for (int m = 0; m < di.rows(); ++m) {
        double s = 0;
        for (int u = 0; u < di.cols(); ++u) s += (di(m, u) - oi(m, u)) * x1[static_cast<size_t>(u)];
        sharp[static_cast<size_t>(m)] -= s;
      }
      resid = std::max(resid, norm2(sharp) / std::pow(om, 1.0 / r));
    }
  return resid;
}

struct EngineResult {
  std::vector<Vec> y;
  std::vector<Mat> ydag;
  std::vector<WindowStat> windows;
};

// Windowed Picard iteration with the halving split policy.
EngineResult run_engine(const Problem& pr, const Vec& a, const SolveSpec& spec, int span_i0,
                        int span_i1, double contraction_factor) {
  const Grid& g = *pr.grid;
  const ControlFn& w = *pr.omega;
  const double omega_total = std::max(w(g.t(span_i0), g.t(span_i1)), 1e-300);

  EngineResult sol;
  sol.y.assign(static_cast<size_t>(span_i1 - span_i0 + 1), a);
  if (pr.rough()) sol.ydag.assign(sol.y.size(), Mat());

  Vec a_win = a;
  auto plan = plan_windows(g, span_i0, span_i1, contraction_factor, pr.p, w, spec.safety, spec.stack);
  for (size_t wi = 0; wi < plan.size(); ++wi) {
    int i0 = plan[wi].i0;
    int i1 = plan[wi].i1;
    for (;;) {
      const int n = i1 - i0 + 1;
      const double tol_win =
          std::max(spec.tol * w(g.t(i0), g.t(i1)) / omega_total, kStallScale * (1 + norm2(a_win)));
      std::vector<Vec> y(static_cast<size_t>(n), a_win);
      std::vector<Mat> dag;
      if (pr.rough()) {
        dag.assign(static_cast<size_t>(n), Mat());
        const bool forced = pr.bmat && !pr.bmat->empty();
        for (int i = 0; i < n; ++i) {  // constant start with the Euler-germ dagger
          Mat v = pr.f->value(a_win);
          if (forced) v += *pr.bmat;
          dag[static_cast<size_t>(i)] = matmul(v, pr.Z->daggers()[static_cast<size_t>(i0 + i)]);
        }
      }
      WindowStat stat;
      stat.i0 = i0;
      stat.i1 = i1;
      bool done = false;
      double prev = std::numeric_limits<double>::infinity();
      for (int iter = 0; iter < spec.max_iter; ++iter) {
        std::vector<Vec> ny;
        std::vector<Mat> ndag;
        picard_pass(pr, i0, n, a_win, y, ny, ndag);
        const double resid = window_residual(pr, i0, ny, y, ndag, dag);
        stat.residual_history.push_back(resid);
        stat.iters = iter + 1;
        stat.residual = resid;
        y = std::move(ny);
        dag = std::move(ndag);
        if (resid <= tol_win) {
          done = true;
          break;
        }
        if (iter >= 2 && resid > 0.95 * prev) break;  // stalled or not contracting
        prev = resid;
      }
      if (done || stat.residual <= spec.tol) {
        for (int i = 0; i < n; ++i) {
          sol.y[static_cast<size_t>(i0 - span_i0 + i)] = y[static_cast<size_t>(i)];
          if (pr.rough()) sol.ydag[static_cast<size_t>(i0 - span_i0 + i)] = dag[static_cast<size_t>(i)];
        }
        a_win = y.back();
        sol.windows.push_back(std::move(stat));
        break;
      }
      if (i1 - i0 <= 1)
        throw DivergenceError("picard: window below one grid step failed to contract");
      i1 = i0 + std::max(1, (i1 - i0) / 2);  // split policy
    }
    if (i1 != plan[wi].i1) {
      auto rest = plan_windows(g, i1, span_i1, contraction_factor, pr.p, w, spec.safety, spec.stack);
      plan.resize(wi + 1);
      plan.insert(plan.end(), rest.begin(), rest.end());
    }
  }
  return sol;
}

}  // namespace

double sewing_constant(double theta) {
  if (theta <= 1.0) throw RegimeError("sewing_constant: theta must exceed 1");
  return 1.0 / (1.0 - std::pow(2.0, 1.0 - theta));
}

YoungSolution solve_young(const Vec& a, const VectorField& f, const DiscretePath& x,
                          const DiscretePath& b, double p, const ControlFn& omega,
                          const SolveSpec& spec) {
  x.check();
  if (p < 1 || p >= 2) throw RegimeError("solve_young: p must lie in [1,2)");
  if (f.k < 1) throw RegimeError("solve_young: field needs one analytic derivative");
  if (1.0 + std::min(f.gamma, 1.0) <= p)
    throw RegimeError("solve_young: regularity budget 1 + gamma must exceed p");
  if (!b.values.empty() && !(b.grid == x.grid))
    throw InvalidGridError("solve_young: forcing must share the grid");
  if (f.cols != x.dim || f.in_dim != static_cast<int>(a.size()))
    throw DimensionError("solve_young: field/driver shapes disagree");

  Problem pr;
  pr.g = &f;
  pr.h = &x;
  pr.b = b.values.empty() ? nullptr : &b;
  pr.grid = &x.grid;
  pr.omega = &omega;
  pr.p = p;

  const double theta = 2.0 / p;
  const double factor =
      d1_sup_estimate(f, a, 1.0) * pvar_norm(x, p, omega) * (1.0 + sewing_constant(theta));
  EngineResult res = run_engine(pr, a, spec, 0, x.grid.steps(), factor);

  YoungSolution sol;
  sol.y = DiscretePath(x.grid, f.in_dim);
  sol.y.values = std::move(res.y);
  sol.windows = std::move(res.windows);
  return sol;
}

SpanSolve solve_rough_span(const Vec& a, const Mat& bmat, const VectorField& f,
                           const ControlledPath& Z, const SolveSpec& spec, int i0, int i1) {
  const double p = Z.indices().p;
  if (p < 2 || p >= 3) throw RegimeError("solve_rough: p must lie in [2,3)");
  if (f.k < 1) throw RegimeError("solve_rough: field needs one analytic derivative");
  if (f.cols != Z.rows() || f.in_dim != static_cast<int>(a.size()))
    throw DimensionError("solve_rough: field/integrator shapes disagree");
  if (!bmat.empty() && (bmat.rows() != f.in_dim || bmat.cols() != Z.rows()))
    throw DimensionError("solve_rough: forcing matrix shape");

  const RoughPath& x = Z.x();
  const FlatFamily zf = flat(Z);
  Problem pr;
  pr.f = &f;
  pr.bmat = &bmat;
  pr.Z = &Z;
  pr.zflat = &zf;
  pr.grid = &x.grid();
  pr.omega = &x.control();
  pr.p = p;

  const double rho = rough_norm(x).value;
  const double factor = d1_sup_estimate(f, a, 1.0) * rho * (1.0 + sewing_constant(3.0 / p));
  EngineResult res = run_engine(pr, a, spec, i0, i1, factor);

  SpanSolve out;
  out.i0 = i0;
  out.i1 = i1;
  out.y = std::move(res.y);
  out.ydag = std::move(res.ydag);
  out.windows = std::move(res.windows);
  return out;
}

namespace {

RoughSolution assemble_rough(const Mat& bmat, const VectorField& f, const ControlledPath& Z,
                             SpanSolve&& span) {
  // Dagger refresh so the displayed rule ydag = (f(y) + b) zdag is exact.
  for (size_t i = 0; i < span.y.size(); ++i) {
    Mat v = f.value(span.y[i]);
    if (!bmat.empty()) v += bmat;
    span.ydag[i] = matmul(v, Z.daggers()[i]);
  }
  CrpIndices idx{Z.indices().p, Z.indices().p, Z.indices().p / 2.0};
  return RoughSolution{
      ControlledPath(Z.base(), std::move(span.y), std::move(span.ydag), f.in_dim, 1, idx),
      std::move(span.windows)};
}

}  // namespace

RoughSolution solve_rough(const Vec& a, const Mat& bmat, const VectorField& f,
                          const ControlledPath& Z, const SolveSpec& spec) {
  SpanSolve span = solve_rough_span(a, bmat, f, Z, spec, 0, Z.grid().steps());
  return assemble_rough(bmat, f, Z, std::move(span));
}

RoughSolution solve_mixed(const Vec& a, const VectorField& f, const VectorField& g,
                          const ControlledPath& Z, const DiscretePath& h, double q_h,
                          const SolveSpec& spec) {
  h.check();
  if (!(h.grid == Z.grid())) throw InvalidGridError("solve_mixed: h must share the grid");
  const double p = Z.indices().p;
  if (p < 2 || p >= 3) throw RegimeError("solve_mixed: p must lie in [2,3)");
  if (1.0 / p + 1.0 / q_h <= 1.0)
    throw RegimeError("solve_mixed: Young condition on (p, q_h) violated");
  if (f.k < 1 || g.k < 1) throw RegimeError("solve_mixed: fields need one analytic derivative");
  if (g.cols != h.dim || g.in_dim != f.in_dim) throw DimensionError("solve_mixed: Young field shape");

  const RoughPath& x = Z.x();
  const FlatFamily zf = flat(Z);
  Mat no_forcing;
  Problem pr;
  pr.f = &f;
  pr.bmat = &no_forcing;
  pr.Z = &Z;
  pr.zflat = &zf;
  pr.g = &g;
  pr.h = &h;
  pr.grid = &x.grid();
  pr.omega = &x.control();
  pr.p = p;

  const double rho = rough_norm(x).value;
  const double factor =
      d1_sup_estimate(f, a, 1.0) * rho * (1.0 + sewing_constant(3.0 / p)) +
      d1_sup_estimate(g, a, 1.0) * pvar_norm(h, q_h, x.control()) *
          (1.0 + sewing_constant(1.0 / p + 1.0 / q_h));
  EngineResult res = run_engine(pr, a, spec, 0, x.grid().steps(), factor);

  SpanSolve span;
  span.i0 = 0;
  span.i1 = x.grid().steps();
  span.y = std::move(res.y);
  span.ydag = std::move(res.ydag);
  span.windows = std::move(res.windows);
  return assemble_rough(no_forcing, f, Z, std::move(span));
}

std::vector<RoughSolution> dilated_family(const Vec& a, const VectorField& f, const VectorField& g,
                                          const RoughPath& X, const DiscretePath& h, double q_h,
                                          const std::vector<double>& eps_list,
                                          const SolveSpec& spec) {
  std::vector<RoughSolution> out;
  out.reserve(eps_list.size());
  for (double eps : eps_list) {
    auto base = std::make_shared<RoughPath>(dilate(X, eps));
    out.push_back(solve_mixed(a, f, g, canonical_crp(base), h, q_h, spec));
  }
  return out;
}

}  // namespace rp
