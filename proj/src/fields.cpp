#include "rp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rp/rng.hpp"

namespace rp {

namespace {

std::map<std::string, double> parse_params(const std::string& spec, std::string* name) {
  std::map<std::string, double> params;
  std::string rest;
  *name = spec;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    *name = spec.substr(0, pos);
    rest = spec.substr(pos + 1);
  }
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("field spec: expected key=value, got " + item);
    params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return params;
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Deterministic coefficient tables for the tanh field.
double tanh_amp(int i, int j) { return 0.4 + 0.15 * ((i + 2 * j) % 3); }
double tanh_w(int i, int j, int k) { return std::cos(1.0 + i + 2.0 * j + 3.0 * k); }
double tanh_off(int i, int j) { return 0.2 * ((i + j) % 2 ? -1.0 : 1.0); }

VectorField make_tanh_field(int dv, int du, double scale) {
  VectorField f;
  f.name = "tanh";
  f.in_dim = dv;
  f.rows = dv;
  f.cols = du;
  f.k = 2;
  f.gamma = 1.0;
  f.value = [dv, du, scale](const Vec& y) {
    Mat m(dv, du);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < du; ++j) {
        double s = tanh_off(i, j);
        for (int k2 = 0; k2 < dv; ++k2) s += tanh_w(i, j, k2) * y[static_cast<size_t>(k2)];
        m(i, j) = tanh_amp(i, j) * std::tanh(scale * s);
      }
    return m;
  };
  f.deriv1 = [dv, du, scale](const Vec& y) {
    Mat d(dv * du, dv);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < du; ++j) {
        double s = tanh_off(i, j);
        for (int k2 = 0; k2 < dv; ++k2) s += tanh_w(i, j, k2) * y[static_cast<size_t>(k2)];
        const double th = std::tanh(scale * s);
        const double sech2 = 1.0 - th * th;
        for (int k2 = 0; k2 < dv; ++k2)
          d(i * du + j, k2) = tanh_amp(i, j) * scale * sech2 * tanh_w(i, j, k2);
      }
    return d;
  };
  f.deriv2 = [dv, du, scale](const Vec& y) {
    Mat d(dv * du, dv * dv);
    for (int i = 0; i < dv; ++i)
      for (int j = 0; j < du; ++j) {
        double s = tanh_off(i, j);
        for (int k2 = 0; k2 < dv; ++k2) s += tanh_w(i, j, k2) * y[static_cast<size_t>(k2)];
        const double th = std::tanh(scale * s);
        const double sech2 = 1.0 - th * th;
        for (int k2 = 0; k2 < dv; ++k2)
          for (int l = 0; l < dv; ++l)
            d(i * du + j, k2 * dv + l) =
                -2.0 * tanh_amp(i, j) * scale * scale * th * sech2 * tanh_w(i, j, k2) * tanh_w(i, j, l);
      }
    return d;
  };
  double amp_frob = 0, w_sup = 0;
  for (int i = 0; i < dv; ++i)
    for (int j = 0; j < du; ++j) {
      amp_frob += tanh_amp(i, j) * tanh_amp(i, j);
      double wn = 0;
      for (int k2 = 0; k2 < dv; ++k2) wn += tanh_w(i, j, k2) * tanh_w(i, j, k2);
      w_sup = std::max(w_sup, std::sqrt(wn));
    }
  amp_frob = std::sqrt(amp_frob);
  f.sup_value = amp_frob;
  f.sup_d1 = amp_frob * scale * w_sup;
  f.sup_d2 = amp_frob * scale * scale * w_sup * w_sup;  // |2 tanh sech^2| <= 0.77
  f.hold_gamma_dk = f.sup_d2 * w_sup * scale;           // crude upper bound on |D^3|
  f.is_bounded = true;
  return f;
}

}  // namespace

Vec VectorField::d1_apply(const Vec& y, const Vec& h) const {
  if (k < 1) throw RegimeError("field '" + name + "' has no analytic derivative");
  return matvec(deriv1(y), h);
}

double derivative_fd_check(const VectorField& f, int n_points, double box_half_width,
                           unsigned long long seed, double fd_eps) {
  CounterRng rng(seed, 0x6664636bULL);
  double worst = 0;
  for (int pt = 0; pt < n_points; ++pt) {
    Vec y(static_cast<size_t>(f.in_dim));
    for (double& v : y) v = box_half_width * (2 * rng.uniform() - 1);
    for (int dir = 0; dir < f.in_dim; ++dir) {
      Vec yp = y, ym = y;
      yp[static_cast<size_t>(dir)] += fd_eps;
      ym[static_cast<size_t>(dir)] -= fd_eps;
      if (f.k >= 1) {
        const Mat vp = f.value(yp), vm = f.value(ym);
        const Mat d1 = f.deriv1(y);
        double scale = std::max(1.0, max_abs(d1));
        for (int m = 0; m < f.out_dim(); ++m) {
          const double fd =
              (vp(m / f.cols, m % f.cols) - vm(m / f.cols, m % f.cols)) / (2 * fd_eps);
          worst = std::max(worst, std::abs(fd - d1(m, dir)) / scale);
        }
      }
      if (f.k >= 2) {
        const Mat dp = f.deriv1(yp), dm = f.deriv1(ym);
        const Mat d2 = f.deriv2(y);
        double scale = std::max(1.0, max_abs(d2));
        for (int m = 0; m < f.out_dim(); ++m)
          for (int k2 = 0; k2 < f.in_dim; ++k2) {
            const double fd = (dp(m, k2) - dm(m, k2)) / (2 * fd_eps);
            worst = std::max(worst, std::abs(fd - d2(m, k2 * f.in_dim + dir)) / scale);
          }
      }
    }
  }
  return worst;
}

VectorField make_field(const std::string& spec) {
  std::string name;
  const auto params = parse_params(spec, &name);

  if (name == "zero") {
    VectorField f;
    f.name = name;
    f.in_dim = static_cast<int>(param(params, "dv", 1));
    f.rows = f.in_dim;
    f.cols = static_cast<int>(param(params, "du", 1));
    f.k = 2;
    const int r = f.rows, c = f.cols, in = f.in_dim;
    f.value = [r, c](const Vec&) { return Mat(r, c); };
    f.deriv1 = [r, c, in](const Vec&) { return Mat(r * c, in); };
    f.deriv2 = [r, c, in](const Vec&) { return Mat(r * c, in * in); };
    return f;
  }
  if (name == "const") {
    VectorField f;
    f.name = name;
    f.in_dim = static_cast<int>(param(params, "dv", 1));
    f.rows = f.in_dim;
    f.cols = static_cast<int>(param(params, "du", 1));
    f.k = 2;
    const double cval = param(params, "c", 1.0);
    const int r = f.rows, c = f.cols, in = f.in_dim;
    f.value = [r, c, cval](const Vec&) { return Mat(r, c, cval); };
    f.deriv1 = [r, c, in](const Vec&) { return Mat(r * c, in); };
    f.deriv2 = [r, c, in](const Vec&) { return Mat(r * c, in * in); };
    f.sup_value = cval * std::sqrt(static_cast<double>(r * c));
    return f;
  }
  if (name == "linear") {
    VectorField f;
    f.name = name;
    f.in_dim = 1;
    f.rows = 1;
    f.cols = 1;
    f.k = 2;
    const double lam = param(params, "lambda", 1.0);
    f.value = [lam](const Vec& y) {
      Mat m(1, 1);
      m(0, 0) = lam * y[0];
      return m;
    };
    f.deriv1 = [lam](const Vec&) {
      Mat d(1, 1);
      d(0, 0) = lam;
      return d;
    };
    f.deriv2 = [](const Vec&) { return Mat(1, 1); };
    f.sup_d1 = std::abs(lam);
    f.is_bounded = false;  // linear growth; local estimates apply
    return f;
  }
  if (name == "rotation") {
    VectorField f;
    f.name = name;
    f.in_dim = 2;
    f.rows = 2;
    f.cols = 1;
    f.k = 2;
    const double th = param(params, "theta", 1.0);
    f.value = [th](const Vec& y) {
      Mat m(2, 1);
      m(0, 0) = -th * y[1];
      m(1, 0) = th * y[0];
      return m;
    };
    f.deriv1 = [th](const Vec&) {
      Mat d(2, 2);
      d(0, 1) = -th;
      d(1, 0) = th;
      return d;
    };
    f.deriv2 = [](const Vec&) { return Mat(2, 4); };
    f.sup_d1 = std::abs(th);
    f.is_bounded = false;
    return f;
  }
  if (name == "tanh") {
    return make_tanh_field(static_cast<int>(param(params, "dv", 1)),
                           static_cast<int>(param(params, "du", 1)), param(params, "scale", 1.0));
  }
  if (name == "boundary") {
    VectorField f;
    f.name = name;
    f.in_dim = 1;
    f.rows = 1;
    f.cols = 1;
    f.k = 1;
    const double g = param(params, "gamma", 0.5);
    const double c = param(params, "c", 1.0);
    f.gamma = g;
    f.value = [g, c](const Vec& y) {
      Mat m(1, 1);
      m(0, 0) = c * std::pow(std::abs(y[0]), 1.0 + g);
      return m;
    };
    f.deriv1 = [g, c](const Vec& y) {
      Mat d(1, 1);
      d(0, 0) = c * (1.0 + g) * (y[0] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(y[0]), g);
      return d;
    };
    f.hold_gamma_dk = c * (1.0 + g) * std::pow(2.0, 1.0 - g);  // exact for the odd power
    f.is_bounded = false;
    return f;
  }
  if (name == "sin-map" || name == "tanh-map" || name == "id-map") {
    VectorField f;
    f.name = name;
    f.in_dim = static_cast<int>(param(params, "d", 1));
    f.rows = f.in_dim;
    f.cols = 1;
    f.k = 2;
    const int d = f.in_dim;
    const double scale = param(params, "scale", 1.0);
    const int which = name == "sin-map" ? 0 : (name == "tanh-map" ? 1 : 2);
    auto g0 = [which, scale](double x) {
      return which == 0 ? std::sin(scale * x) : which == 1 ? std::tanh(scale * x) : x;
    };
    auto g1 = [which, scale](double x) {
      if (which == 0) return scale * std::cos(scale * x);
      if (which == 1) {
        const double t = std::tanh(scale * x);
        return scale * (1 - t * t);
      }
      return 1.0;
    };
    auto g2 = [which, scale](double x) {
      if (which == 0) return -scale * scale * std::sin(scale * x);
      if (which == 1) {
        const double t = std::tanh(scale * x);
        return -2 * scale * scale * t * (1 - t * t);
      }
      return 0.0;
    };
    f.value = [d, g0](const Vec& y) {
      Mat m(d, 1);
      for (int i = 0; i < d; ++i) m(i, 0) = g0(y[static_cast<size_t>(i)]);
      return m;
    };
    f.deriv1 = [d, g1](const Vec& y) {
      Mat m(d, d);
      for (int i = 0; i < d; ++i) m(i, i) = g1(y[static_cast<size_t>(i)]);
      return m;
    };
    f.deriv2 = [d, g2](const Vec& y) {
      Mat m(d, d * d);
      for (int i = 0; i < d; ++i) m(i, i * d + i) = g2(y[static_cast<size_t>(i)]);
      return m;
    };
    f.sup_value = which == 2 ? 0 : std::sqrt(static_cast<double>(d));
    f.sup_d1 = scale;
    f.sup_d2 = which == 1 ? 0.77 * scale * scale : scale * scale;
    f.hold_gamma_dk = scale * scale * scale;
    f.is_bounded = which != 2;
    return f;
  }
  if (name == "oddpow-map") {
    // sign(y) |y|^gamma: gamma-Hoelder with exact seminorm 2^(1-gamma),
    // attained across the kink at 0.
    VectorField f;
    f.name = name;
    f.in_dim = 1;
    f.rows = 1;
    f.cols = 1;
    f.k = 0;
    const double g = param(params, "gamma", 0.5);
    f.gamma = g;
    f.value = [g](const Vec& y) {
      Mat m(1, 1);
      m(0, 0) = (y[0] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(y[0]), g);
      return m;
    };
    f.hold_gamma_dk = std::pow(2.0, 1.0 - g);
    return f;
  }
  throw ConfigError("unknown field: " + name);
}

VectorField compose_fields(const VectorField& f, const VectorField& g) {
  if (g.cols != 1 || f.in_dim != g.rows) throw DimensionError("compose_fields: shape mismatch");
  VectorField h;
  h.name = f.name + "." + g.name;
  h.in_dim = g.in_dim;
  h.rows = f.rows;
  h.cols = f.cols;
  h.k = std::min(f.k, g.k);
  h.gamma = std::min(f.gamma, g.gamma);
  auto fv = f.value, gv = g.value;
  h.value = [fv, gv](const Vec& y) {
    const Mat gy = gv(y);
    Vec mid(static_cast<size_t>(gy.rows()));
    for (int i = 0; i < gy.rows(); ++i) mid[static_cast<size_t>(i)] = gy(i, 0);
    return fv(mid);
  };
  if (h.k >= 1) {
    auto fd = f.deriv1, gd = g.deriv1;
    const int gr = g.rows;
    h.deriv1 = [fd, gd, gv, gr](const Vec& y) {
      const Mat gy = gv(y);
      Vec mid(static_cast<size_t>(gr));
      for (int i = 0; i < gr; ++i) mid[static_cast<size_t>(i)] = gy(i, 0);
      return matmul(fd(mid), gd(y));  // chain rule
    };
  }
  return h;
}

static HoelderReport hoelder_estimate_impl(const VectorField& f, double alpha, double box, int n,
                                           unsigned long long seed) {
  CounterRng rng(seed, 0x686f6cULL);
  HoelderReport rep;
  rep.alpha = alpha;
  rep.n_pairs = n;
  for (int it = 0; it < n; ++it) {
    Vec x(static_cast<size_t>(f.in_dim)), y(static_cast<size_t>(f.in_dim));
    for (double& v : x) v = box * (2 * rng.uniform() - 1);
    for (double& v : y) v = box * (2 * rng.uniform() - 1);
    double dist = norm2(x - y);
    if (dist == 0) continue;
    const double diff = frob_norm(f.value(x) - f.value(y));
    rep.H_hat = std::max(rep.H_hat, diff / std::pow(dist, alpha));
  }
  return rep;
}

HoelderReport hoelder_seminorm_estimate(const VectorField& f, double alpha, double box_half_width,
                                        int n_pairs, unsigned long long seed) {
  if (alpha <= 0 || alpha > 1) throw RegimeError("hoelder estimate: alpha in (0,1]");
  if (n_pairs < 2) throw RegimeError("hoelder estimate: need at least 2 pairs");
  if (box_half_width <= 0) throw ConfigError("hoelder estimate: degenerate box");
  return hoelder_estimate_impl(f, alpha, box_half_width, n_pairs, seed);
}

double interpolation_check(const VectorField& g, double H_gamma, double gamma, double kappa,
                           int n_quadruples, double box, unsigned long long seed) {
  if (gamma <= 0 || gamma > 1 || kappa < 0 || kappa > 1)
    throw RegimeError("interpolation_check: bad exponents");
  CounterRng rng(seed, 0x71756164ULL);
  const double kb = 1.0 - kappa;
  double worst = -std::numeric_limits<double>::infinity();
  Vec y(static_cast<size_t>(g.in_dim)), z(y), yp(y), zp(y);
  for (int it = 0; it < n_quadruples; ++it) {
    for (double& v : y) v = box * (2 * rng.uniform() - 1);
    for (double& v : z) v = box * (2 * rng.uniform() - 1);
    for (double& v : yp) v = box * (2 * rng.uniform() - 1);
    for (double& v : zp) v = box * (2 * rng.uniform() - 1);
    const double lhs = frob_norm(g.value(z) - g.value(y) - g.value(zp) + g.value(yp));
    const double rhs = H_gamma *
                       (std::pow(norm2(yp - y), kappa * gamma) + std::pow(norm2(zp - z), kappa * gamma)) *
                       (std::pow(norm2(zp - yp), gamma * kb) + std::pow(norm2(z - y), gamma * kb));
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

DiscretePath omega_map(const VectorField& f, const DiscretePath& y) {
  y.check();
  if (y.dim != f.in_dim) throw DimensionError("omega_map: dimension mismatch");
  DiscretePath out(y.grid, f.out_dim());
  for (size_t i = 0; i < y.values.size(); ++i) {
    const Mat m = f.value(y.values[i]);
    out.values[i] = m.data();
  }
  return out;
}

DiscretePath omega_derivative(const VectorField& f, const DiscretePath& y, const DiscretePath& h) {
  y.check();
  h.check();
  if (f.k < 1) throw RegimeError("omega_derivative: field has no derivative");
  if (y.dim != f.in_dim || h.dim != f.in_dim || !(y.grid == h.grid))
    throw DimensionError("omega_derivative: dimension/grid mismatch");
  DiscretePath out(y.grid, f.out_dim());
  for (size_t i = 0; i < y.values.size(); ++i) out.values[i] = f.d1_apply(y.values[i], h.values[i]);
  return out;
}

OmegaProbe omega_hoelder_probe(const VectorField& f, double H_gamma, const DiscretePath& y,
                               const DiscretePath& z, double p, double kappa, double gamma,
                               const ControlFn& omega) {
  const double q = p / (kappa * gamma);
  if (q < 1) throw RegimeError("omega_hoelder_probe: q = p/(kappa gamma) < 1");
  const double kb = 1.0 - kappa;
  OmegaProbe probe;
  const DiscretePath fy = omega_map(f, y);
  const DiscretePath fz = omega_map(f, z);
  DiscretePath diff = fy;
  for (size_t i = 0; i < diff.values.size(); ++i) diff.values[i] = fy.values[i] - fz.values[i];
  const double num = pvar_norm(diff, q, omega);
  DiscretePath dyz = y;
  for (size_t i = 0; i < dyz.values.size(); ++i) dyz.values[i] = y.values[i] - z.values[i];
  const double den = std::pow(pvar_norm(dyz, p, omega), kb * gamma);
  probe.ratio = den > 0 ? num / den : 0.0;
  const double wT = omega(0.0, y.grid.horizon());
  probe.bound = H_gamma * (1 + std::pow(wT, kb * gamma / p)) *
                (std::pow(pvar_norm(y, p, omega), kappa * gamma) +
                 std::pow(pvar_norm(z, p, omega), kappa * gamma));
  probe.holds = probe.ratio <= probe.bound * (1 + 1e-12);
  return probe;
}

}  // namespace rp
