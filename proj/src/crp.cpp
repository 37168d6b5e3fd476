#include "rp/crp.hpp"

#include <algorithm>
#include <cmath>

#include "rp/rng.hpp"

namespace rp {

namespace {

// ydag_s x^2_{s,t} with the dagger extended over U (x) U by
// a (x) b -> a (x) (ydag b): componentwise (x^2 ydag^T)(u, m).
Mat dagger_on_level2(const Mat& x2, const Mat& ydag) {
  const int du = x2.rows();
  const int m = ydag.rows();
  Mat c(du, m);
  for (int u = 0; u < du; ++u)
    for (int mi = 0; mi < m; ++mi) {
      double s = 0;
      for (int j = 0; j < du; ++j) s += x2(u, j) * ydag(mi, j);
      c(u, mi) = s;
    }
  return c;
}

// Contraction of a dagger of an L(W,V)-valued CRP (rows m = dV*dW, one
// column per base direction u) against a U (x) W matrix.
Vec contract_dagger_flat(const Mat& ydag, const Mat& zflat, int dv, int dw) {
  Vec out(static_cast<size_t>(dv), 0.0);
  for (int v = 0; v < dv; ++v) {
    double s = 0;
    for (int w = 0; w < dw; ++w)
      for (int u = 0; u < zflat.rows(); ++u) s += ydag(v * dw + w, u) * zflat(u, w);
    out[static_cast<size_t>(v)] = s;
  }
  return out;
}

double pvar_of(const std::vector<Vec>& vals, const Grid& g, double exponent, const ControlFn& w) {
  double best = 0;
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double om = w(g.t(i), g.t(j));
    if (om <= 0) return;
    best = std::max(best, norm2(vals[static_cast<size_t>(j)] - vals[static_cast<size_t>(i)]) /
                              std::pow(om, 1.0 / exponent));
  });
  return best;
}

}  // namespace

ControlledPath::ControlledPath(std::shared_ptr<const RoughPath> base, std::vector<Vec> y,
                               std::vector<Mat> ydag, int rows, int cols, CrpIndices idx)
    : base_(std::move(base)), y_(std::move(y)), ydag_(std::move(ydag)), rows_(rows), cols_(cols), idx_(idx) {
  const size_t n = static_cast<size_t>(base_->grid().size());
  if (y_.size() != n || ydag_.size() != n)
    throw InvalidGridError("controlled path: one value and dagger per grid instant");
  const int m = rows_ * cols_;
  for (const Vec& v : y_)
    if (static_cast<int>(v.size()) != m) throw DimensionError("controlled path: value dim mismatch");
  for (const Mat& d : ydag_)
    if (d.rows() != m || d.cols() != base_->dim())
      throw DimensionError("controlled path: dagger must map base space to value space");
}

Vec ControlledPath::remainder(int i, int j) const {
  Vec rem = value_increment(i, j);
  const Vec x1 = base_->level1(i, j);
  const Mat& d = ydag_[static_cast<size_t>(i)];
  for (int m = 0; m < d.rows(); ++m) {
    double s = 0;
    for (int u = 0; u < d.cols(); ++u) s += d(m, u) * x1[static_cast<size_t>(u)];
    rem[static_cast<size_t>(m)] -= s;
  }
  return rem;
}

Mat ControlledPath::value_as_mat(int i) const {
  Mat m(rows_, cols_);
  m.data() = y_[static_cast<size_t>(i)];
  return m;
}

ControlledPath canonical_crp(std::shared_ptr<const RoughPath> base) {
  const int d = base->dim();
  const int n = base->grid().size();
  const DiscretePath path = base->path();
  std::vector<Mat> dag(static_cast<size_t>(n), Mat::identity(d));
  CrpIndices idx{base->p(), base->p(), base->p() / 2.0};
  return ControlledPath(std::move(base), path.values, std::move(dag), d, 1, idx);
}

ControlledPath constant_crp(std::shared_ptr<const RoughPath> base, const Vec& value, int rows,
                            int cols, CrpIndices idx) {
  const size_t n = static_cast<size_t>(base->grid().size());
  const int du = base->dim();
  std::vector<Vec> y(n, value);
  std::vector<Mat> dag(n, Mat(rows * cols, du));
  return ControlledPath(std::move(base), std::move(y), std::move(dag), rows, cols, idx);
}

CrpNorms crp_norms(const ControlledPath& Y) {
  const Grid& g = Y.grid();
  const ControlFn& w = Y.x().control();
  const CrpIndices& ix = Y.indices();
  CrpNorms out;

  std::vector<Vec> dag_flat(Y.daggers().size());
  for (size_t i = 0; i < dag_flat.size(); ++i) dag_flat[i] = Y.daggers()[i].data();
  out.dag_q = pvar_of(dag_flat, g, ix.q, w);

  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double om = w(g.t(i), g.t(j));
    if (om <= 0) return;
    out.sharp_r = std::max(out.sharp_r, norm2(Y.remainder(i, j)) / std::pow(om, 1.0 / ix.r));
  });
  out.norm_x = out.dag_q + out.sharp_r;
  out.norm_x_full = norm2(Y.values().front()) + norm2(Y.daggers().front().data()) + out.norm_x;

  // Slack of the three displayed inequalities.
  const double wT = w(0.0, g.horizon());
  double dag_sup = 0, y_sup = 0;
  for (const Vec& d : dag_flat) dag_sup = std::max(dag_sup, norm2(d));
  for (const Vec& v : Y.values()) y_sup = std::max(y_sup, norm2(v));
  const double xp = rough_norm(Y.x()).value;
  const double y_pvar = pvar_of(Y.values(), g, ix.p, w);
  out.slack_dag_sup = (1 + std::pow(wT, 1.0 / ix.q)) * out.norm_x_full - dag_sup;
  out.slack_y_pvar = dag_sup * xp + out.sharp_r * std::pow(wT, 1.0 / ix.r - 1.0 / ix.p) - y_pvar;
  out.slack_y_sup = (1 + std::pow(wT, 1.0 / ix.q) + std::pow(wT, 1.0 / ix.r - 1.0 / ix.p)) *
                        (1 + std::pow(wT, 1.0 / ix.p)) * out.norm_x_full * (1 + xp) -
                    y_sup;
  return out;
}

double crp_distance(const ControlledPath& A, const ControlledPath& B) {
  if (A.base() != B.base() || A.value_dim() != B.value_dim())
    throw DimensionError("crp_distance: paths must share base and value space");
  const Grid& g = A.grid();
  const ControlFn& w = A.x().control();
  const CrpIndices& ix = A.indices();
  std::vector<Vec> dy(A.values().size()), ddag(A.values().size());
  for (size_t i = 0; i < dy.size(); ++i) {
    dy[i] = A.values()[i] - B.values()[i];
    ddag[i] = A.daggers()[i].data();
    const auto& bd = B.daggers()[i].data();
    for (size_t k = 0; k < ddag[i].size(); ++k) ddag[i][k] -= bd[k];
  }
  double sharp = 0;
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double om = w(g.t(i), g.t(j));
    if (om <= 0) return;
    sharp = std::max(sharp, norm2(A.remainder(i, j) - B.remainder(i, j)) / std::pow(om, 1.0 / ix.r));
  });
  return norm2(dy.front()) + norm2(ddag.front()) + pvar_of(ddag, g, ix.q, w) + sharp;
}

FlatFamily flat(const ControlledPath& Y) {
  if (Y.indices().theta() <= 1.0)
    throw RegimeError("flat: theta = min(2/p + 1/q, 1/p + 1/r) must exceed 1");
  const RoughPath& x = Y.x();
  MultiplicativeGerm germ;
  germ.theta = Y.indices().theta();
  germ.omega = x.control();
  germ.eval = [&x, &Y](int i, int j) {
    return MonoidElem(x.level1(i, j), Y.value_increment(i, j),
                      dagger_on_level2(x.increment(i, j).level2, Y.daggers()[static_cast<size_t>(i)]));
  };
  return FlatFamily(Y.base(), sew_multiplicative(germ, x.grid()));
}

double flat_bound_check(const FlatFamily& fam, const ControlledPath& Y) {
  const RoughPath& x = Y.x();
  const Grid& g = x.grid();
  const double rho = rough_norm(x).value;
  const double scale = crp_norms(Y).norm_x * std::max(rho, rho * rho);
  if (scale == 0) return 0.0;
  const double theta = Y.indices().theta();
  double worst = 0;
  for_each_scan_pair(g.size(), [&](int i, int j) {
    const double om = x.control()(g.t(i), g.t(j));
    if (om <= 0) return;
    const Mat gap = fam.value(i, j) -
                    dagger_on_level2(x.increment(i, j).level2, Y.daggers()[static_cast<size_t>(i)]);
    worst = std::max(worst, frob_norm(gap) / (scale * std::pow(om, theta)));
  });
  return worst;
}

ControlledPath crp_integral(const ControlledPath& Y, const ControlledPath& Z) {
  if (Y.base() != Z.base()) throw DimensionError("crp_integral: integrand and integrator must share base");
  if (Z.cols() != 1) throw DimensionError("crp_integral: integrator must be vector-valued");
  const int dv = Y.rows(), dw = Y.cols();
  if (dw != Z.rows()) throw DimensionError("crp_integral: L(W,V) integrand against W integrator required");
  if (Y.indices().theta() <= 1.0 || Z.indices().theta() <= 1.0)
    throw RegimeError("crp_integral: both theta exponents must exceed 1");

  const FlatFamily zflat = flat(Z);
  const Grid& g = Y.grid();
  const int n = g.size();
  const int du = Y.x().dim();

  std::vector<Vec> vals(static_cast<size_t>(n), Vec(static_cast<size_t>(dv), 0.0));
  std::vector<KahanSum> acc(static_cast<size_t>(dv));
  for (int k = 0; k + 1 < n; ++k) {
    Vec germ = matvec(Y.value_as_mat(k), Z.value_increment(k, k + 1));
    const Vec corr = contract_dagger_flat(Y.daggers()[static_cast<size_t>(k)], zflat.value(k, k + 1), dv, dw);
    for (int c = 0; c < dv; ++c) {
      acc[static_cast<size_t>(c)].add(germ[static_cast<size_t>(c)] + corr[static_cast<size_t>(c)]);
      vals[static_cast<size_t>(k + 1)][static_cast<size_t>(c)] = acc[static_cast<size_t>(c)].value();
    }
  }

  std::vector<Mat> dag(static_cast<size_t>(n), Mat(dv, du));
  for (int i = 0; i < n; ++i)
    dag[static_cast<size_t>(i)] = matmul(Y.value_as_mat(i), Z.daggers()[static_cast<size_t>(i)]);

  CrpIndices idx{Y.indices().p, std::max(Y.indices().p, Z.indices().q), Y.indices().p / 2.0};
  return ControlledPath(Y.base(), std::move(vals), std::move(dag), dv, 1, idx);
}

CrpIntegralReport crp_integral_check(const ControlledPath& Y, const ControlledPath& Z) {
  const ControlledPath I = crp_integral(Y, Z);
  const FlatFamily zflat = flat(Z);
  const Grid& g = Y.grid();
  const double rho = rough_norm(Y.x()).value;
  const double rho2 = 1 + std::max(rho, rho * rho);
  const CrpNorms ny = crp_norms(Y);
  const CrpNorms nz = crp_norms(Z);
  CrpIntegralReport rep;
  const double theta_hat = Y.indices().theta();
  const double scale = ny.norm_x * nz.norm_x_full * rho2;
  if (scale > 0) {
    double worst = 0;
    const int dv = Y.rows(), dw = Y.cols();
    for_each_scan_pair(g.size(), [&](int i, int j) {
      const double om = Y.x().control()(g.t(i), g.t(j));
      if (om <= 0) return;
      Vec gap = I.value_increment(i, j) - matvec(Y.value_as_mat(i), Z.value_increment(i, j));
      const Vec corr = contract_dagger_flat(Y.daggers()[static_cast<size_t>(i)], zflat.value(i, j), dv, dw);
      for (size_t c = 0; c < gap.size(); ++c) gap[c] -= corr[c];
      worst = std::max(worst, norm2(gap) / (scale * std::pow(om, theta_hat)));
    });
    rep.K_compensated = worst;
  }
  const double denom = ny.norm_x_full * nz.norm_x_full * rho2;
  rep.K_norm = denom > 0 ? crp_norms(I).norm_x / denom : 0.0;
  return rep;
}

ControlledPath crp_product(const ControlledPath& Y, const ControlledPath& Z, CrpProductMode mode) {
  if (Y.base() != Z.base()) throw DimensionError("crp_product: paths must share base");
  const Grid& g = Y.grid();
  const int n = g.size();
  const int du = Y.x().dim();
  CrpIndices idx{Y.indices().p, std::max(Y.indices().q, Z.indices().q),
                 std::max({Y.indices().r, Z.indices().r, Y.indices().p / 2.0})};

  if (mode == CrpProductMode::compose_linear) {
    if (Z.cols() != 1 || Y.cols() != Z.rows())
      throw DimensionError("crp_product: compose-linear needs L(W,V) times W");
    const int dv = Y.rows(), dw = Y.cols();
    std::vector<Vec> vals(static_cast<size_t>(n));
    std::vector<Mat> dag(static_cast<size_t>(n), Mat(dv, du));
    for (int i = 0; i < n; ++i) {
      const Vec& z = Z.values()[static_cast<size_t>(i)];
      vals[static_cast<size_t>(i)] = matvec(Y.value_as_mat(i), z);
      Mat d = matmul(Y.value_as_mat(i), Z.daggers()[static_cast<size_t>(i)]);  // y zdag
      const Mat& yd = Y.daggers()[static_cast<size_t>(i)];
      for (int v = 0; v < dv; ++v)
        for (int u = 0; u < du; ++u) {
          double s = 0;
          for (int w = 0; w < dw; ++w) s += yd(v * dw + w, u) * z[static_cast<size_t>(w)];
          d(v, u) += s;  // ydag z
        }
      dag[static_cast<size_t>(i)] = std::move(d);
    }
    return ControlledPath(Y.base(), std::move(vals), std::move(dag), dv, 1, idx);
  }

  // Tensor mode: value y (x) z, Leibniz dagger.
  if (Y.cols() != 1 || Z.cols() != 1) throw DimensionError("crp_product: tensor mode needs vector values");
  const int m1 = Y.rows(), m2 = Z.rows();
  std::vector<Vec> vals(static_cast<size_t>(n), Vec(static_cast<size_t>(m1) * m2));
  std::vector<Mat> dag(static_cast<size_t>(n), Mat(m1 * m2, du));
  for (int i = 0; i < n; ++i) {
    const Vec& y = Y.values()[static_cast<size_t>(i)];
    const Vec& z = Z.values()[static_cast<size_t>(i)];
    const Mat& yd = Y.daggers()[static_cast<size_t>(i)];
    const Mat& zd = Z.daggers()[static_cast<size_t>(i)];
    for (int a = 0; a < m1; ++a)
      for (int b = 0; b < m2; ++b) {
        vals[static_cast<size_t>(i)][static_cast<size_t>(a * m2 + b)] =
            y[static_cast<size_t>(a)] * z[static_cast<size_t>(b)];
        for (int u = 0; u < du; ++u)
          dag[static_cast<size_t>(i)](a * m2 + b, u) =
              yd(a, u) * z[static_cast<size_t>(b)] + y[static_cast<size_t>(a)] * zd(b, u);
      }
  }
  return ControlledPath(Y.base(), std::move(vals), std::move(dag), m1, m2, idx);
}

ControlledPath crp_omega(const VectorField& f, const ControlledPath& Y, double kappa) {
  if (f.k < 1) throw RegimeError("crp_omega: field must have at least one analytic derivative");
  if (Y.cols() != 1 || Y.rows() != f.in_dim) throw DimensionError("crp_omega: dimension mismatch");
  const int n = Y.grid().size();
  std::vector<Vec> vals(static_cast<size_t>(n));
  std::vector<Mat> dag(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vec& y = Y.values()[static_cast<size_t>(i)];
    vals[static_cast<size_t>(i)] = f.value(y).data();
    dag[static_cast<size_t>(i)] = matmul(f.deriv1(y), Y.daggers()[static_cast<size_t>(i)]);
  }
  const CrpIndices& in = Y.indices();
  const double kg = std::max(kappa * std::min(f.gamma, 1.0), 1e-12);
  CrpIndices idx{in.p, std::max(in.q, in.p) / kg, std::max(in.r, in.p / (1.0 + kg))};
  return ControlledPath(Y.base(), std::move(vals), std::move(dag), f.rows, f.cols, idx);
}

double crp_omega_remainder_check(const VectorField& f, const ControlledPath& Y, int n_pairs) {
  const ControlledPath F = crp_omega(f, Y);
  const int n = Y.grid().size();
  CounterRng rng(0x6f6d6567ULL, 2);
  double worst = 0;
  for (int it = 0; it < n_pairs; ++it) {
    const int i = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n - 1));
    const int j = i + 1 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(n - i - 1));
    const Vec lhs = F.remainder(i, j);
    const Vec& ys = Y.values()[static_cast<size_t>(i)];
    const Vec dy = Y.value_increment(i, j);
    // Df(y_s) y#_{s,t}
    Vec rhs = matvec(f.deriv1(ys), Y.remainder(i, j));
    // + int_0^1 (Df(y_s + u dy) - Df(y_s)) dy du, composite Simpson.
    const int quad = 64;
    const Mat d0 = f.deriv1(ys);
    Vec integral(rhs.size(), 0.0);
    for (int qk = 0; qk <= quad; ++qk) {
      const double u = static_cast<double>(qk) / quad;
      const double wgt = (qk == 0 || qk == quad) ? 1.0 : (qk % 2 ? 4.0 : 2.0);
      Vec yu = ys;
      axpy(u, dy, yu);
      axpy(wgt, matvec(f.deriv1(yu) - d0, dy), integral);
    }
    axpy(1.0 / (3.0 * quad), integral, rhs);
    worst = std::max(worst, norm2(lhs - rhs));
  }
  return worst;
}

}  // namespace rp
