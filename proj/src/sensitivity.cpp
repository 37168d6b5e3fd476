#include "rp/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace rp {

VectorField variational_extension(const VectorField& f) {
  if (f.k < 2) throw RegimeError("variational_extension: field needs two analytic derivatives");
  const int dv = f.in_dim, dw = f.cols;
  const int n_state = dv + dv * dv;
  VectorField F;
  F.name = f.name + ".variational";
  F.in_dim = n_state;
  F.rows = n_state;
  F.cols = dw;
  F.k = 1;
  F.gamma = 1.0;
  F.is_bounded = false;

  auto fv = f.value, fd1 = f.deriv1, fd2 = f.deriv2;
  F.value = [fv, fd1, dv, dw, n_state](const Vec& state) {
    const Vec y(state.begin(), state.begin() + dv);
    Mat out(n_state, dw);
    const Mat top = fv(y);
    for (int i = 0; i < dv; ++i)
      for (int w = 0; w < dw; ++w) out(i, w) = top(i, w);
    const Mat d1 = fd1(y);
    // Row dv + i*dv + j carries (Df(y) M)_{i j}.
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < dv; ++j)
        for (int w = 0; w < dw; ++w) {
          double s = 0;
          for (int k = 0; k < dv; ++k)
            s += d1(i * dw + w, k) * state[static_cast<size_t>(dv + k * dv + j)];
          out(dv + i * dv + j, w) = s;
        }
    return out;
  };
  F.deriv1 = [fd1, fd2, dv, dw, n_state](const Vec& state) {
    const Vec y(state.begin(), state.begin() + dv);
    Mat out(n_state * dw, n_state);
    const Mat d1 = fd1(y);
    const Mat d2 = fd2(y);
    for (int i = 0; i < dv; ++i)
      for (int w = 0; w < dw; ++w)
        for (int l = 0; l < dv; ++l) out((i * dw + w), l) = d1(i * dw + w, l);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < dv; ++j)
        for (int w = 0; w < dw; ++w) {
          const int row = (dv + i * dv + j) * dw + w;
          for (int l = 0; l < dv; ++l) {
            double s = 0;
            for (int k = 0; k < dv; ++k)
              s += d2(i * dw + w, k * dv + l) * state[static_cast<size_t>(dv + k * dv + j)];
            out(row, l) = s;
          }
          for (int k = 0; k < dv; ++k) out(row, dv + k * dv + j) = d1(i * dw + w, k);
        }
    return out;
  };
  return F;
}

VectorField directional_extension(const VectorField& f, const VectorField& g) {
  if (f.k < 2 || g.k < 1)
    throw RegimeError("directional_extension: need D^2 f and D g analytically");
  if (g.in_dim != f.in_dim || g.rows != f.rows || g.cols != f.cols)
    throw DimensionError("directional_extension: direction field shape mismatch");
  const int dv = f.in_dim, dw = f.cols;
  const int n_state = 2 * dv;
  VectorField F;
  F.name = f.name + "+" + g.name + ".directional";
  F.in_dim = n_state;
  F.rows = n_state;
  F.cols = dw;
  F.k = 1;
  F.is_bounded = false;

  auto fv = f.value, fd1 = f.deriv1, fd2 = f.deriv2, gv = g.value, gd1 = g.deriv1;
  F.value = [fv, fd1, gv, dv, dw, n_state](const Vec& state) {
    const Vec y(state.begin(), state.begin() + dv);
    Mat out(n_state, dw);
    const Mat top = fv(y);
    const Mat gy = gv(y);
    const Mat d1 = fd1(y);
    for (int i = 0; i < dv; ++i)
      for (int w = 0; w < dw; ++w) {
        out(i, w) = top(i, w);
        double s = gy(i, w);
        for (int k = 0; k < dv; ++k) s += d1(i * dw + w, k) * state[static_cast<size_t>(dv + k)];
        out(dv + i, w) = s;
      }
    return out;
  };
  F.deriv1 = [fd1, fd2, gd1, dv, dw, n_state](const Vec& state) {
    const Vec y(state.begin(), state.begin() + dv);
    Mat out(n_state * dw, n_state);
    const Mat d1 = fd1(y);
    const Mat d2 = fd2(y);
    const Mat dg = gd1(y);
    for (int i = 0; i < dv; ++i)
      for (int w = 0; w < dw; ++w) {
        for (int l = 0; l < dv; ++l) out(i * dw + w, l) = d1(i * dw + w, l);
        const int row = (dv + i) * dw + w;
        for (int l = 0; l < dv; ++l) {
          double s = dg(i * dw + w, l);
          for (int k = 0; k < dv; ++k)
            s += d2(i * dw + w, k * dv + l) * state[static_cast<size_t>(dv + k)];
          out(row, l) = s;
        }
        for (int k = 0; k < dv; ++k) out(row, dv + k) = d1(i * dw + w, k);
      }
    return out;
  };
  return F;
}

VectorField add_fields(const VectorField& f, const VectorField& g, double scale) {
  if (f.in_dim != g.in_dim || f.rows != g.rows || f.cols != g.cols)
    throw DimensionError("add_fields: shape mismatch");
  VectorField h;
  h.name = f.name + "+" + g.name;
  h.in_dim = f.in_dim;
  h.rows = f.rows;
  h.cols = f.cols;
  h.k = std::min(f.k, g.k);
  h.gamma = std::min(f.gamma, g.gamma);
  auto fv = f.value, gv = g.value;
  h.value = [fv, gv, scale](const Vec& y) { return fv(y) + gv(y) * scale; };
  if (h.k >= 1) {
    auto fd = f.deriv1, gd = g.deriv1;
    h.deriv1 = [fd, gd, scale](const Vec& y) { return fd(y) + gd(y) * scale; };
  }
  if (h.k >= 2) {
    auto fd = f.deriv2, gd = g.deriv2;
    h.deriv2 = [fd, gd, scale](const Vec& y) { return fd(y) + gd(y) * scale; };
  }
  h.sup_value = f.sup_value + std::abs(scale) * g.sup_value;
  h.sup_d1 = f.sup_d1 + std::abs(scale) * g.sup_d1;
  h.sup_d2 = f.sup_d2 + std::abs(scale) * g.sup_d2;
  h.hold_gamma_dk = f.hold_gamma_dk + std::abs(scale) * g.hold_gamma_dk;
  h.is_bounded = f.is_bounded && g.is_bounded;
  return h;
}

JacobianFlow jacobian_flow(const Vec& a, const VectorField& f, const ControlledPath& Z,
                           const SolveSpec& spec, int r_idx, int t_idx) {
  const VectorField F = variational_extension(f);
  const int dv = f.in_dim;
  Vec state(static_cast<size_t>(dv + dv * dv), 0.0);
  for (int i = 0; i < dv; ++i) {
    state[static_cast<size_t>(i)] = a[static_cast<size_t>(i)];
    state[static_cast<size_t>(dv + i * dv + i)] = 1.0;  // M starts at Id
  }
  SpanSolve span = solve_rough_span(state, Mat(), F, Z, spec, r_idx, t_idx);
  JacobianFlow out;
  out.i0 = r_idx;
  out.i1 = t_idx;
  out.windows = std::move(span.windows);
  out.y.reserve(span.y.size());
  out.M.reserve(span.y.size());
  for (const Vec& s : span.y) {
    out.y.emplace_back(s.begin(), s.begin() + dv);
    Mat m(dv, dv);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < dv; ++j) m(i, j) = s[static_cast<size_t>(dv + i * dv + j)];
    out.M.push_back(std::move(m));
  }
  return out;
}

Mat jacobian_fd(const Vec& a, const VectorField& f, const ControlledPath& Z, const SolveSpec& spec,
                int r_idx, int t_idx, double delta) {
  const int dv = f.in_dim;
  Mat J(dv, dv);
  for (int j = 0; j < dv; ++j) {
    Vec ap = a, am = a;
    ap[static_cast<size_t>(j)] += delta;
    am[static_cast<size_t>(j)] -= delta;
    const SpanSolve yp = solve_rough_span(ap, Mat(), f, Z, spec, r_idx, t_idx);
    const SpanSolve ym = solve_rough_span(am, Mat(), f, Z, spec, r_idx, t_idx);
    for (int i = 0; i < dv; ++i)
      J(i, j) = (yp.y.back()[static_cast<size_t>(i)] - ym.y.back()[static_cast<size_t>(i)]) / (2 * delta);
  }
  return J;
}

double flow_compose_check(const Vec& a, const VectorField& f, const ControlledPath& Z,
                          const SolveSpec& spec, int r_idx, int s_idx, int t_idx) {
  const SpanSolve direct = solve_rough_span(a, Mat(), f, Z, spec, r_idx, t_idx);
  if (s_idx == r_idx || s_idx == t_idx) {
    return 0.0;
  }
  const SpanSolve first = solve_rough_span(a, Mat(), f, Z, spec, r_idx, s_idx);
  const SpanSolve second = solve_rough_span(first.y.back(), Mat(), f, Z, spec, s_idx, t_idx);
  return norm2(direct.y.back() - second.y.back());
}

InvertibilityReport invertibility_check(const Vec& a, const VectorField& f, const ControlledPath& Z,
                                        const SolveSpec& spec, int r_idx, int t_idx) {
  const JacobianFlow jf = jacobian_flow(a, f, Z, spec, r_idx, t_idx);
  InvertibilityReport rep;
  rep.det_min = std::numeric_limits<double>::infinity();
  const Mat id = Mat::identity(f.in_dim);
  for (const Mat& m : jf.M) {
    rep.opnorm_gap = std::max(rep.opnorm_gap, op_norm(m - id));
    rep.det_min = std::min(rep.det_min, std::abs(det(m)));
  }
  rep.neumann_invertible = rep.opnorm_gap < 1.0;
  rep.det_invertible = rep.det_min > 1e-12;
  return rep;
}

LogLogFit loglog_fit(const std::vector<double>& deltas, const std::vector<double>& responses) {
  LogLogFit fit;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] > 0 && responses[i] > 0) {
      xs.push_back(std::log(deltas[i]));
      ys.push_back(std::log(responses[i]));
    }
  }
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  fit.slope = vx > 0 ? (n * sxy - sx * sy) / vx : 0;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = (vx > 0 && vy > 0) ? (n * sxy - sx * sy) * (n * sxy - sx * sy) / (vx * vy) : 1.0;
  return fit;
}

namespace {

// Pathwise response metric valid across different base rough paths:
// |dy_0| + |dydag_0| + ||dy||_p + ||dydag||_q over the shared grid.
double cross_base_distance(const ControlledPath& A, const ControlledPath& B) {
  const Grid& g = A.grid();
  const ControlFn& w = A.x().control();
  std::vector<Vec> dy(A.values().size()), ddag(A.values().size());
  for (size_t i = 0; i < dy.size(); ++i) {
    dy[i] = A.values()[i] - B.values()[i];
    ddag[i] = A.daggers()[i].data();
    const auto& bd = B.daggers()[i].data();
    for (size_t c = 0; c < ddag[i].size(); ++c) ddag[i][c] -= bd[c];
  }
  double best_y = 0, best_d = 0;
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double om = w(g.t(i), g.t(j));
    if (om <= 0) return;
    best_y = std::max(best_y, norm2(dy[static_cast<size_t>(j)] - dy[static_cast<size_t>(i)]) /
                                  std::pow(om, 1.0 / A.indices().p));
    best_d = std::max(best_d, norm2(ddag[static_cast<size_t>(j)] - ddag[static_cast<size_t>(i)]) /
                                  std::pow(om, 1.0 / A.indices().q));
  });
  return norm2(dy.front()) + norm2(ddag.front()) + best_y + best_d;
}

}  // namespace

ScanReport perturbation_response(const RdeProblem& base, const PerturbationSpec& pert) {
  if (pert.sizes.size() < 3) throw ConfigError("perturbation scan: need at least 3 sizes");
  for (size_t i = 0; i < pert.sizes.size(); ++i) {
    if (pert.sizes[i] <= 0) throw ConfigError("perturbation scan: sizes must be positive");
    if (i > 0 && pert.sizes[i] >= pert.sizes[i - 1])
      throw ConfigError("perturbation scan: sizes must decrease");
  }
  SolveSpec spec = base.spec;
  const double dmin = pert.sizes.back();
  spec.tol = std::min(spec.tol, dmin * dmin / 100.0);

  ScanReport rep;
  rep.deltas = pert.sizes;
  const ControlledPath Zbase = canonical_crp(base.X);
  const RoughSolution base_sol = solve_rough(base.a, Mat(), base.f, Zbase, spec);

  using Kind = PerturbationSpec::Kind;
  switch (pert.kind) {
    case Kind::initial_point: rep.kind = "initial-point"; break;
    case Kind::field_direction: rep.kind = "field-direction"; break;
    case Kind::dilation: rep.kind = "dilation"; break;
    case Kind::translation: rep.kind = "translation"; break;
  }

  auto solve_at = [&](double d) -> double {
    switch (pert.kind) {
      case Kind::initial_point: {
        Vec a = base.a;
        axpy(d, pert.direction, a);
        return crp_distance(solve_rough(a, Mat(), base.f, Zbase, spec).y, base_sol.y);
      }
      case Kind::field_direction: {
        const VectorField fp = add_fields(base.f, pert.field_direction, d);
        return crp_distance(solve_rough(base.a, Mat(), fp, Zbase, spec).y, base_sol.y);
      }
      case Kind::dilation: {
        auto Xp = std::make_shared<RoughPath>(dilate(*base.X, 1.0 + d));
        return cross_base_distance(solve_rough(base.a, Mat(), base.f, canonical_crp(Xp), spec).y,
                                   base_sol.y);
      }
      case Kind::translation: {
        DiscretePath hd = pert.h_direction;
        for (Vec& v : hd.values)
          for (double& c : v) c *= d;
        auto Xp = std::make_shared<RoughPath>(translate(*base.X, hd, pert.q_h));
        return cross_base_distance(solve_rough(base.a, Mat(), base.f, canonical_crp(Xp), spec).y,
                                   base_sol.y);
      }
    }
    return 0.0;
  };

  // Perturbed solves are independent; fan out when asked. Responses land in
  // indexed slots so the report is deterministic either way.
  rep.responses.assign(pert.sizes.size(), 0.0);
  std::vector<char> diverged(pert.sizes.size(), 0);
  const int jobs = std::max(1, pert.jobs);
  std::vector<std::future<void>> tasks;
  for (size_t i = 0; i < pert.sizes.size(); ++i) {
    auto work = [&, i] {
      try {
        rep.responses[i] = solve_at(pert.sizes[i]);
      } catch (const DivergenceError&) {
        rep.responses[i] = std::numeric_limits<double>::quiet_NaN();
        diverged[i] = 1;
      }
    };
    if (jobs > 1) {
      tasks.push_back(std::async(std::launch::async, work));
      if (static_cast<int>(tasks.size()) >= jobs) {
        for (auto& t : tasks) t.get();
        tasks.clear();
      }
    } else {
      work();
    }
  }
  for (auto& t : tasks) t.get();
  for (size_t i = 0; i < diverged.size(); ++i)
    if (diverged[i]) rep.flags.push_back("divergence at delta, partial report");

  std::vector<double> ds, rs;
  for (size_t i = 0; i < rep.responses.size(); ++i)
    if (std::isfinite(rep.responses[i]) && rep.responses[i] > 0) {
      ds.push_back(rep.deltas[i]);
      rs.push_back(rep.responses[i]);
    }
  const LogLogFit fit = loglog_fit(ds, rs);
  rep.slope = fit.slope;
  rep.r2 = fit.r2;
  if (pert.kind == Kind::dilation || pert.kind == Kind::translation)
    rep.flags.push_back("cross-base metric: |dy_0| + |dydag_0| + pvar(dy) + qvar(dydag)");
  if (!base.f.is_bounded) rep.flags.push_back("unbounded field: local estimates only");
  if (rep.r2 < 0.98) rep.flags.push_back("fit unreliable (r2 < 0.98)");
  const double span = std::log10(pert.sizes.front() / pert.sizes.back());
  if (span < 1.5) rep.flags.push_back("sizes span fewer than 1.5 decades");
  return rep;
}

ControlledPath field_directional_derivative(const Vec& a, const VectorField& f,
                                            const VectorField& g, const ControlledPath& Z,
                                            const SolveSpec& spec) {
  const VectorField F = directional_extension(f, g);
  const int dv = f.in_dim;
  Vec state(static_cast<size_t>(2 * dv), 0.0);
  for (int i = 0; i < dv; ++i) state[static_cast<size_t>(i)] = a[static_cast<size_t>(i)];
  const RoughSolution sol = solve_rough(state, Mat(), F, Z, spec);
  // Project onto the u block.
  const int n = Z.grid().size();
  std::vector<Vec> u(static_cast<size_t>(n));
  std::vector<Mat> udag(static_cast<size_t>(n), Mat(dv, Z.x().dim()));
  for (int i = 0; i < n; ++i) {
    const Vec& s = sol.y.values()[static_cast<size_t>(i)];
    u[static_cast<size_t>(i)] = Vec(s.begin() + dv, s.end());
    const Mat& d = sol.y.daggers()[static_cast<size_t>(i)];
    for (int r = 0; r < dv; ++r)
      for (int c = 0; c < d.cols(); ++c) udag[static_cast<size_t>(i)](r, c) = d(dv + r, c);
  }
  return ControlledPath(Z.base(), std::move(u), std::move(udag), dv, 1, sol.y.indices());
}

double field_directional_fd_check(const Vec& a, const VectorField& f, const VectorField& g,
                                  const ControlledPath& Z, const SolveSpec& spec, double eps) {
  SolveSpec tight = spec;
  tight.tol = std::min(tight.tol, eps * eps / 100.0);
  const ControlledPath u = field_directional_derivative(a, f, g, Z, tight);
  const RoughSolution plus = solve_rough(a, Mat(), add_fields(f, g, eps), Z, tight);
  const RoughSolution minus = solve_rough(a, Mat(), add_fields(f, g, -eps), Z, tight);
  Vec fd = plus.y.values().back() - minus.y.values().back();
  for (double& v : fd) v /= 2 * eps;
  const double scale = std::max(1.0, norm2(u.values().back()));
  return norm2(fd - u.values().back()) / scale;
}

}  // namespace rp
