#include "rp/verify.hpp"

#include <cmath>
#include <functional>

#include "rp/drivers.hpp"
#include "rp/io.hpp"
#include "rp/rng.hpp"
#include "rp/sensitivity.hpp"

namespace rp {

namespace {

struct Runner {
  VerifyReport report;
  unsigned long long seed;

  // A check computes a measured value; pass when measured <= threshold.
  void upper(const std::string& name, double threshold,
             const std::function<double()>& measure, const std::string& note = "") {
    CheckResult res;
    res.name = name;
    try {
      res.measured = measure();
      res.pass = res.measured <= threshold;
    } catch (const std::exception& e) {
      res.pass = false;
      res.note = e.what();
    }
    if (res.note.empty()) res.note = note;
    report.checks.push_back(std::move(res));
  }
  // Pass when measured >= threshold.
  void lower(const std::string& name, double threshold,
             const std::function<double()>& measure, const std::string& note = "") {
    CheckResult res;
    res.name = name;
    try {
      res.measured = measure();
      res.pass = res.measured >= threshold;
    } catch (const std::exception& e) {
      res.pass = false;
      res.note = e.what();
    }
    if (res.note.empty()) res.note = note;
    report.checks.push_back(std::move(res));
  }
};

DiscretePath sin_driver(int n, int d = 1) {
  DriverSpec s;
  s.kind = DriverSpec::Kind::smooth_sin;
  s.N = n;
  s.d = d;
  return smooth_path(s);
}

DiscretePath random_walk(const Grid& g, int d, unsigned long long seed) {
  CounterRng rng(seed, 77);
  DiscretePath x(g, d);
  for (int i = 1; i < g.size(); ++i)
    for (int c = 0; c < d; ++c)
      x.values[static_cast<size_t>(i)][static_cast<size_t>(c)] =
          x.values[static_cast<size_t>(i - 1)][static_cast<size_t>(c)] +
          (2 * rng.uniform() - 1) * 0.1;
  return x;
}

}  // namespace

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["all_pass"] = all_pass;
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"note", c.note}});
  }
  j["checks"] = arr;
  return j;
}

VerifyReport verify_suite(unsigned long long seed) {
  Runner r;
  r.seed = seed;
  const ControlFn w;

  // grid_control ------------------------------------------------------------
  r.upper("grid.control_superadditive", 1e-15,
          [&] { return std::max(0.0, w.validate(1.0, 10000, seed)); });
  r.upper("grid.pvar_monotone_coarsening", 1e-14, [&] {
    const DiscretePath x = random_walk(Grid::uniform(1.0, 128), 2, seed);
    const double fine = pvar_norm(x, 2.0, w);
    double worst = 0;
    for (int stride : {2, 4, 8})
      worst = std::max(worst, pvar_norm(x.subsample(stride), 2.0, w) - fine);
    return worst;
  });
  r.upper("grid.embedding_cp_cq", 1e-12, [&] {
    const DiscretePath x = random_walk(Grid::uniform(1.0, 128), 2, seed + 1);
    return pvar_norm(x, 3.0, w) -
           pvar_norm(x, 1.5, w) * std::pow(w(0, 1.0), 1.0 / 3.0 - 1.0 / 1.5);
  });
  r.upper("grid.pvar_homogeneity", 1e-12, [&] {
    DiscretePath x = random_walk(Grid::uniform(1.0, 64), 1, seed + 2);
    const double base = pvar_norm(x, 2.0, w);
    for (auto& v : x.values) v[0] *= -2.5;
    return std::abs(pvar_norm(x, 2.0, w) - 2.5 * base);
  });
  r.upper("grid.sup_embedding", 1e-12, [&] {
    const DiscretePath x = random_walk(Grid::uniform(1.0, 128), 3, seed + 3);
    return std::max(0.0, -sup_embedding_check(x, 2.0, w).slack);
  });

  // tensor_rough ------------------------------------------------------------
  r.upper("tensor.group_axioms", 1e-12, [&] {
    CounterRng rng(seed, 13);
    double worst = 0;
    for (int it = 0; it < 1000; ++it) {
      Tensor2 a(3), b(3), c(3);
      for (Tensor2* t : {&a, &b, &c}) {
        for (double& v : t->level1) v = 2 * rng.uniform() - 1;
        for (double& v : t->level2.data()) v = 2 * rng.uniform() - 1;
      }
      const Tensor2 ab_c = tensor_mul(tensor_mul(a, b), c);
      const Tensor2 a_bc = tensor_mul(a, tensor_mul(b, c));
      worst = std::max({worst, norm_inf(ab_c.level1 - a_bc.level1),
                        max_abs(ab_c.level2 - a_bc.level2)});
      const Tensor2 e = tensor_mul(a, tensor_inv(a));
      worst = std::max({worst, norm_inf(e.level1), max_abs(e.level2)});
    }
    return worst;
  });
  r.upper("tensor.chen_reconstruction", 1e-13, [&] {
    return chen_defect(lift_piecewise_linear(sin_driver(256, 2), 2.0), 512);
  });
  r.upper("tensor.dilate_composes", 0.0, [&] {
    const RoughPath X = lift_piecewise_linear(sin_driver(64, 2), 2.0);
    const Tensor2 a = dilate(dilate(X, 0.5), -3.0).increment(0, 64);
    const Tensor2 b = dilate(X, -1.5).increment(0, 64);
    return std::max(norm_inf(a.level1 - b.level1), max_abs(a.level2 - b.level2));
  });
  r.upper("tensor.translate_roundtrip", 1e-13, [&] {
    const RoughPath X = lift_piecewise_linear(sin_driver(64, 2), 2.0);
    DiscretePath h = random_walk(X.grid(), 2, seed + 4);
    DiscretePath mh = h;
    for (auto& v : mh.values)
      for (double& c : v) c = -c;
    const RoughPath Y = translate(translate(X, h, 1.0), mh, 1.0);
    return std::max(norm_inf(Y.increment(0, 64).level1 - X.increment(0, 64).level1),
                    max_abs(Y.increment(0, 64).level2 - X.increment(0, 64).level2));
  });
  r.upper("tensor.geometric_symmetry", 1e-12, [&] {
    const RoughPath X = lift_piecewise_linear(sin_driver(64, 2), 2.0);
    double worst = 0;
    for (const Tensor2& s : X.steps()) {
      const Mat sym = 0.5 * (s.level2 + transpose(s.level2));
      worst = std::max(worst, max_abs(sym - 0.5 * outer(s.level1, s.level1)));
    }
    return worst;
  });

  // drivers -----------------------------------------------------------------
  r.upper("drivers.lift_dilation_commutes", 1e-14, [&] {
    DiscretePath x = sin_driver(64, 2);
    DiscretePath ex = x;
    for (auto& v : ex.values)
      for (double& c : v) c *= 0.75;
    const RoughPath a = lift_piecewise_linear(ex, 2.0);
    const RoughPath b = dilate(lift_piecewise_linear(x, 2.0), 0.75);
    double worst = 0;
    for (int j = 1; j <= 64; ++j)
      worst = std::max({worst, norm_inf(a.increment(0, j).level1 - b.increment(0, j).level1),
                        max_abs(a.increment(0, j).level2 - b.increment(0, j).level2)});
    return worst;
  });
  r.upper("drivers.fbm_covariance_mc", 0.05, [&] {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.4;
    s.N = 64;
    double m_end = 0;
    const int n_mc = 4000;
    for (int k = 0; k < n_mc; ++k) {
      s.seed = static_cast<std::uint64_t>(k) + seed;
      const DiscretePath x = sample_fbm(s);
      m_end += x.values.back()[0] * x.values.back()[0];
    }
    return std::abs(m_end / n_mc - 1.0);  // E x_1^2 = 1
  });
  r.upper("drivers.pure_area_chen", 1e-15, [&] {
    Mat A(2, 2);
    A(0, 1) = 1.0;
    A(1, 0) = -1.0;
    return chen_defect(pure_area(A, 0.7, Grid::uniform(1.0, 64)));
  });

  // sewing ------------------------------------------------------------------
  r.upper("sewing.additive_exact", 1e-13, [&] {
    const DiscretePath x = sin_driver(128);
    AdditiveGerm g;
    g.theta = 2.0;
    g.eval = [&x](int i, int j) {
      return Vec{x.values[static_cast<size_t>(i)][0] * (x.values[static_cast<size_t>(j)][0] -
                                                        x.values[static_cast<size_t>(i)][0])};
    };
    const SewnAdditive fam = sew_additive(g, x.grid);
    double worst = 0;
    for (int i = 0; i < 120; i += 11)
      for (int j = i + 1; j < 125; j += 7)
        for (int k = j + 1; k <= 128; k += 13)
          worst = std::max(worst, norm2(fam.value(i, k) - (fam.value(i, j) + fam.value(j, k))));
    return worst;
  });
  r.upper("sewing.multiplicative_exact", 1e-13, [&] {
    const DiscretePath a = sin_driver(64);
    const DiscretePath b = random_walk(a.grid, 1, seed + 5);
    MultiplicativeGerm germ;
    germ.theta = 2.0;
    germ.eval = [&](int i, int j) {
      return MonoidElem(a.increment(i, j), b.increment(i, j),
                        outer(a.values[static_cast<size_t>(i)], b.increment(i, j)));
    };
    const SewnMultiplicative fam = sew_multiplicative(germ, a.grid);
    double worst = 0;
    for (int i = 0; i < 60; i += 7)
      for (int j = i + 1; j < 62; j += 5)
        for (int k = j + 1; k <= 64; k += 3) {
          const MonoidElem lhs = boxtimes(fam.value(i, j), fam.value(j, k));
          const MonoidElem rhs = fam.value(i, k);
          worst = std::max({worst, norm2(lhs.a - rhs.a), norm2(lhs.b - rhs.b),
                            frob_norm(lhs.c - rhs.c)});
        }
    return worst;
  });
  r.lower("sewing.young_defect_exponent", 1.8, [&] {
    const DiscretePath x = sin_driver(256);
    AdditiveGerm g;
    g.theta = 2.0;
    g.eval = [&x](int i, int j) {
      return Vec{x.values[static_cast<size_t>(i)][0] * (x.values[static_cast<size_t>(j)][0] -
                                                        x.values[static_cast<size_t>(i)][0])};
    };
    return defect_scan(g, x.grid).theta_hat;
  }, "theta_hat of the smooth Young germ (expected near 2)");

  // hoelder_fields ----------------------------------------------------------
  r.upper("fields.derivative_fd_match", 1e-5, [&] {
    double worst = 0;
    for (const char* spec : {"linear:lambda=0.8", "rotation:theta=1.3", "tanh:dv=2,du=2",
                             "tanh:dv=1,du=1", "sin-map:d=2", "tanh-map:d=1"})
      worst = std::max(worst, derivative_fd_check(make_field(spec), 100, 1.0, seed));
    return worst;
  });
  r.upper("fields.interpolation_bound", 1e-12, [&] {
    double worst = -1e300;
    for (double kappa : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, interpolation_check(make_field("oddpow-map:gamma=0.5"), std::sqrt(2.0), 0.5,
                                                  kappa, 20000, 1.0, seed));
      worst = std::max(worst,
                       interpolation_check(make_field("tanh-map:d=1"), 1.0, 1.0, kappa, 20000,
                                           1.0, seed));
    }
    return worst;
  });
  r.upper("fields.omega_composition", 0.0, [&] {
    const DiscretePath y = random_walk(Grid::uniform(1.0, 64), 2, seed + 6);
    const VectorField fg = compose_fields(make_field("tanh-map:d=2"), make_field("sin-map:d=2"));
    const DiscretePath lhs = omega_map(fg, y);
    const DiscretePath rhs =
        omega_map(make_field("tanh-map:d=2"), omega_map(make_field("sin-map:d=2"), y));
    double worst = 0;
    for (size_t i = 0; i < lhs.values.size(); ++i)
      worst = std::max(worst, norm2(lhs.values[i] - rhs.values[i]));
    return worst;
  });
  r.upper("fields.omega_hoelder_probe", 0.0, [&] {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.45;
    s.N = 128;
    int violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
      s.seed = seed + static_cast<std::uint64_t>(trial);
      const DiscretePath y = sample_fbm(s);
      s.seed = seed + static_cast<std::uint64_t>(trial) + 500;
      const DiscretePath z = sample_fbm(s);
      if (!omega_hoelder_probe(make_field("tanh-map:d=1"), 1.0, y, z, 2.2, 0.5, 1.0, w).holds)
        ++violations;
    }
    return static_cast<double>(violations);
  });

  // young ---------------------------------------------------------------
  r.upper("young.calculus_oracle", 1e-13, [&] {
    const DiscretePath x = sin_driver(1 << 10);
    const DiscretePath I = young_integral(x, x, 1.0, 1.0, w);
    double worst = 0;
    for (size_t i = 0; i < I.values.size(); ++i) {
      const double xv = x.values[i][0], x0 = x.values[0][0];
      worst = std::max(worst, std::abs(I.values[i][0] - 0.5 * (xv * xv - x0 * x0)));
    }
    return worst;
  });
  r.upper("young.bilinearity", 1e-13, [&] {
    const DiscretePath x = sin_driver(256);
    const DiscretePath y = random_walk(x.grid, 1, seed + 7);
    DiscretePath combo(x.grid, 1);
    for (size_t i = 0; i < combo.values.size(); ++i)
      combo.values[i][0] = 2.0 * x.values[i][0] - 0.5 * y.values[i][0];
    const DiscretePath lhs = young_integral(combo, x, 1.0, 1.0, w);
    const DiscretePath a = young_integral(x, x, 1.0, 1.0, w);
    const DiscretePath b = young_integral(y, x, 1.0, 1.0, w);
    double worst = 0;
    for (size_t i = 0; i < lhs.values.size(); ++i)
      worst = std::max(worst,
                       std::abs(lhs.values[i][0] - (2.0 * a.values[i][0] - 0.5 * b.values[i][0])));
    return worst;
  });
  r.upper("young.bound_constant", 10.0, [&] {
    const DiscretePath x = sin_driver(1 << 10);
    DiscretePath y(x.grid, 1);
    for (int i = 0; i < x.grid.size(); ++i)
      y.values[static_cast<size_t>(i)][0] = std::cos(6.283185307179586 * x.grid.t(i));
    return young_bound_check(y, x, 1.0, 1.0, w);
  }, "measured Young constant for the smooth sin pair");

  // crp -----------------------------------------------------------------
  r.upper("crp.flat_cocycle", 1e-13, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(128, 2), 2.0));
    const ControlledPath Y = canonical_crp(X);
    const FlatFamily fam = flat(Y);
    double worst = 0;
    for (int i = 0; i < 120; i += 17)
      for (int j = i + 1; j < 124; j += 11)
        for (int k = j + 1; k <= 128; k += 13) {
          const Mat lhs = fam.value(i, j) + fam.value(j, k) +
                          outer(X->level1(i, j), Y.value_increment(j, k));
          worst = std::max(worst, max_abs(lhs - fam.value(i, k)));
        }
    return worst;
  });
  r.upper("crp.flat_of_canonical_is_level2", 1e-13, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256, 2), 2.0));
    const ControlledPath Y = canonical_crp(X);
    const FlatFamily fam = flat(Y);
    double worst = 0;
    for_each_scan_pair(X->grid().size(), [&](int i, int j) {
      worst = std::max(worst, max_abs(fam.value(i, j) - X->increment(i, j).level2));
    });
    return worst;
  });
  r.upper("crp.integral_calculus_oracle", 1e-13, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(512), 2.0));
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath I = crp_integral(Z, Z);
    const DiscretePath path = X->path();
    double worst = 0;
    for (size_t i = 0; i < I.values().size(); ++i) {
      const double xv = path.values[i][0], x0 = path.values[0][0];
      worst = std::max(worst, std::abs(I.values()[i][0] - 0.5 * (xv * xv - x0 * x0)));
    }
    return worst;
  });
  r.upper("crp.dagger_rule", 0.0, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(128), 2.0));
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath Y = crp_omega(make_field("tanh:dv=1,du=1"), Z);
    const ControlledPath I = crp_integral(Y, Z);
    double worst = 0;
    for (size_t i = 0; i < I.values().size(); ++i)
      worst = std::max(worst, max_abs(I.daggers()[i] - matmul(Y.value_as_mat(static_cast<int>(i)),
                                                              Z.daggers()[i])));
    return worst;
  });
  r.upper("crp.norm_inequalities", 1e-12, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(128), 2.0));
    const ControlledPath F = crp_omega(make_field("tanh:dv=1,du=1"), canonical_crp(X));
    const CrpNorms n = crp_norms(F);
    return std::max({0.0, -n.slack_dag_sup, -n.slack_y_pvar, -n.slack_y_sup});
  });
  r.upper("crp.omega_remainder_formula", 1e-8, [&] {
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(128), 2.0));
    return crp_omega_remainder_check(make_field("tanh:dv=1,du=1"), canonical_crp(X));
  });

  // rde -----------------------------------------------------------------
  SolveSpec spec;
  r.upper("rde.young_exponential", 1e-8, [&] {
    DriverSpec s;
    s.kind = DriverSpec::Kind::smooth_poly;
    s.N = 1 << 12;
    const DiscretePath x = smooth_path(s);
    const YoungSolution sol =
        solve_young({0.8}, make_field("linear:lambda=1.0"), x, DiscretePath(), 1.0, w, spec);
    const double exact = 0.8 * std::exp(x.values.back()[0] - x.values.front()[0]);
    return std::abs(sol.y.values.back()[0] - exact) / std::abs(exact);
  });
  r.upper("rde.rough_exponential", 1e-6, [&] {
    const DiscretePath x = sin_driver(1 << 12);
    const RoughSolution sol =
        solve_rough({0.8}, Mat(), make_field("linear:lambda=1.0"),
                    canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(x, 2.0))), spec);
    const double exact = 0.8 * std::exp(x.values.back()[0] - x.values.front()[0]);
    return std::abs(sol.y.values().back()[0] - exact) / std::abs(exact);
  });
  r.upper("rde.flow_property", 10 * spec.tol, [&] {
    const ControlledPath Z =
        canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0)));
    const VectorField f = make_field("tanh:dv=1,du=1");
    double worst = 0;
    for (int s : {67, 128, 200})
      worst = std::max(worst, flow_compose_check({0.5}, f, Z, spec, 0, s, 256));
    return worst;
  });
  r.upper("rde.residuals_geometric", 0.0, [&] {
    const RoughSolution sol = solve_rough(
        {0.5}, Mat(), make_field("tanh:dv=1,du=1"),
        canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0))),
        spec);
    int violations = 0;
    for (const WindowStat& win : sol.windows)
      for (size_t k = 1; k < win.residual_history.size(); ++k)
        if (win.residual_history[k - 1] > 1e-12 &&
            win.residual_history[k] > 0.9 * win.residual_history[k - 1] + 1e-13)
          ++violations;
    return static_cast<double>(violations);
  });
  r.upper("rde.refinement_order", 0.55, [&] {
    std::vector<double> yT;
    for (int n : {1 << 9, 1 << 10, 1 << 11})
      yT.push_back(solve_rough({0.5}, Mat(), make_field("tanh:dv=1,du=1,scale=1.1"),
                               canonical_crp(std::make_shared<RoughPath>(
                                   lift_piecewise_linear(sin_driver(n), 2.0))),
                               spec)
                       .y.values()
                       .back()[0]);
    return std::abs(yT[2] - yT[1]) / std::abs(yT[1] - yT[0]);
  }, "successive-difference ratio (0.5 means first order)");

  // sensitivity -----------------------------------------------------------
  r.upper("sensitivity.jacobian_vs_fd", 1e-3, [&] {
    SolveSpec tight;
    tight.tol = 1e-12;
    const ControlledPath Z =
        canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0)));
    const VectorField f = make_field("tanh:dv=2,du=1");
    const JacobianFlow jf = jacobian_flow({0.4, -0.1}, f, Z, tight, 0, 256);
    const Mat fd = jacobian_fd({0.4, -0.1}, f, Z, tight, 0, 256, 1e-4);
    return op_norm(jf.M.back() - fd) / op_norm(fd);
  });
  r.upper("sensitivity.jacobian_cocycle", 1e-7, [&] {
    const ControlledPath Z =
        canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0)));
    const VectorField f = make_field("tanh:dv=1,du=1");
    const JacobianFlow whole = jacobian_flow({0.4}, f, Z, spec, 0, 256);
    const JacobianFlow head = jacobian_flow({0.4}, f, Z, spec, 0, 100);
    const JacobianFlow tail = jacobian_flow(head.y.back(), f, Z, spec, 100, 256);
    return max_abs(whole.M.back() - matmul(tail.M.back(), head.M.back()));
  });
  r.lower("sensitivity.initial_slope", 0.95, [&] {
    RdeProblem base;
    base.a = {0.7};
    base.f = make_field("linear:lambda=0.9");
    base.X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0));
    base.spec = spec;
    PerturbationSpec pert;
    pert.kind = PerturbationSpec::Kind::initial_point;
    pert.direction = {1.0};
    pert.sizes = {1e-2, 3e-3, 1e-3, 3e-4};
    return perturbation_response(base, pert).slope;
  }, "log-log slope of the initial-point response (expect 1.0)");
  r.lower("sensitivity.dilation_slope", 0.95, [&] {
    RdeProblem base;
    base.a = {0.7};
    base.f = make_field("tanh:dv=1,du=1");
    base.X = std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0));
    base.spec = spec;
    PerturbationSpec pert;
    pert.kind = PerturbationSpec::Kind::dilation;
    pert.sizes = {1e-1, 3e-2, 1e-2, 3e-3};
    return perturbation_response(base, pert).slope;
  });
  r.upper("sensitivity.directional_fd", 1e-3, [&] {
    const ControlledPath Z =
        canonical_crp(std::make_shared<RoughPath>(lift_piecewise_linear(sin_driver(256), 2.0)));
    return field_directional_fd_check({0.7}, make_field("linear:lambda=0.9"),
                                      make_field("const:dv=1,du=1,c=1"), Z, spec, 1e-4);
  });

  r.report.all_pass = true;
  for (const CheckResult& c : r.report.checks) r.report.all_pass = r.report.all_pass && c.pass;
  return r.report;
}

}  // namespace rp
