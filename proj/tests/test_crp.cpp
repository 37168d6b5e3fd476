#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rp/crp.hpp"
#include "rp/drivers.hpp"
#include "rp/rng.hpp"

using namespace rp;

namespace {

std::shared_ptr<RoughPath> sin_lift(int n, double p = 2.0, int d = 1) {
  DriverSpec s;
  s.kind = DriverSpec::Kind::smooth_sin;
  s.d = d;
  s.N = n;
  return std::make_shared<RoughPath>(lift_piecewise_linear(smooth_path(s), p));
}

std::shared_ptr<RoughPath> fbm_lift(int n, double H, double p, int d = 1,
                                    std::uint64_t seed = 5) {
  DriverSpec s;
  s.kind = DriverSpec::Kind::fbm;
  s.H = H;
  s.N = n;
  s.d = d;
  s.seed = seed;
  return std::make_shared<RoughPath>(lift_piecewise_linear(sample_fbm(s), p));
}

// Componentwise combination sa*A + sb*B of controlled paths over one base.
ControlledPath crp_add(const ControlledPath& A, const ControlledPath& B, double sa, double sb) {
  std::vector<Vec> y(A.values().size());
  std::vector<Mat> d(A.values().size());
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] = sa * A.values()[i] + sb * B.values()[i];
    d[i] = A.daggers()[i] * sa + B.daggers()[i] * sb;
  }
  return ControlledPath(A.base(), std::move(y), std::move(d), A.rows(), A.cols(), A.indices());
}

}  // namespace

TEST_CASE("canonical controlled path") {
  auto X = sin_lift(128);
  const ControlledPath Y = canonical_crp(X);
  const CrpNorms norms = crp_norms(Y);
  CHECK(norms.dag_q == 0.0);      // dagger is constant Id
  CHECK(norms.sharp_r <= 1e-14);  // remainder vanishes
  CHECK(norms.slack_dag_sup >= -1e-12);
  CHECK(norms.slack_y_pvar >= -1e-12);
  CHECK(norms.slack_y_sup >= -1e-12);
}

TEST_CASE("norm inequalities on linear-RDE-like controlled paths") {
  // 100 random cases: Omega images of scaled canonical paths over fBm
  // lifts carry genuine daggers and remainders; every displayed inequality
  // must keep nonnegative slack.
  for (int cs = 0; cs < 100; ++cs) {
    auto X = fbm_lift(64, 0.42, 2.3, 1, 100 + static_cast<std::uint64_t>(cs));
    const double lam = 0.2 + 0.015 * cs;
    const ControlledPath Y =
        crp_omega(make_field("tanh:dv=1,du=1,scale=" + std::to_string(lam)), canonical_crp(X));
    const CrpNorms n = crp_norms(Y);
    CHECK(n.slack_dag_sup >= -1e-12);
    CHECK(n.slack_y_pvar >= -1e-12);
    CHECK(n.slack_y_sup >= -1e-12);
  }
}

TEST_CASE("flat family") {
  auto X = sin_lift(256, 2.0, 2);
  const ControlledPath Y = canonical_crp(X);

  SUBCASE("flat of the canonical path reproduces the second level") {
    const FlatFamily fam = flat(Y);
    double worst = 0;
    for_each_scan_pair(X->grid().size(), [&](int i, int j) {
      worst = std::max(worst, max_abs(fam.value(i, j) - X->increment(i, j).level2));
    });
    CHECK(worst <= 1e-13);
  }
  SUBCASE("cocycle holds at machine precision") {
    const FlatFamily fam = flat(Y);
    double worst = 0;
    for (int i = 0; i < 250; i += 31)
      for (int j = i + 1; j < 252; j += 17)
        for (int k = j + 1; k <= 256; k += 41) {
          const Mat lhs = fam.value(i, j) + fam.value(j, k) +
                          outer(X->level1(i, j), Y.value_increment(j, k));
          worst = std::max(worst, max_abs(lhs - fam.value(i, k)));
        }
    CHECK(worst <= 1e-13);
  }
  SUBCASE("constant path with zero dagger has zero flat") {
    const ControlledPath C = constant_crp(X, {1.0, -2.0}, 2, 1, CrpIndices{2.0, 2.0, 1.0});
    const FlatFamily fam = flat(C);
    CHECK(max_abs(fam.value(0, X->grid().steps())) == 0.0);
  }
  SUBCASE("flat is linear") {
    const ControlledPath Z2 = crp_omega(make_field("tanh-map:d=2"), Y);
    const FlatFamily fa = flat(Y);
    const FlatFamily fb = flat(Z2);
    const FlatFamily fsum = flat(crp_add(Y, Z2, 2.0, -1.0));
    double worst = 0;
    for_each_scan_pair(X->grid().size(), [&](int i, int j) {
      worst = std::max(worst,
                       max_abs(fsum.value(i, j) - (fa.value(i, j) * 2.0 - fb.value(i, j))));
    });
    CHECK(worst <= 1e-12);
  }
  SUBCASE("theta <= 1 is rejected") {
    ControlledPath bad = canonical_crp(X);
    bad.indices() = CrpIndices{2.9, 2.9, 2.9};
    CHECK_THROWS_AS(flat(bad), RegimeError);
  }
  SUBCASE("local bound against dagger times level 2 is finite and stable") {
    const ControlledPath Yc = canonical_crp(sin_lift(128, 2.0, 2));
    const ControlledPath Yf = canonical_crp(sin_lift(256, 2.0, 2));
    const double k1 = flat_bound_check(flat(Yc), Yc);
    const double k2 = flat_bound_check(flat(Yf), Yf);
    CHECK(k1 >= 0);
    CHECK(k2 <= 1.5 * k1 + 1e-9);
  }
}

TEST_CASE("controlled rough integral") {
  SUBCASE("constant integrand with zero dagger transports increments") {
    auto X = sin_lift(64);
    const ControlledPath Z = canonical_crp(X);
    ControlledPath C = constant_crp(X, {2.5}, 1, 1, CrpIndices{2.0, 2.0, 1.0});
    const ControlledPath I = crp_integral(C, Z);
    for (int i = 0; i <= 64; ++i) {
      CHECK(I.values()[static_cast<size_t>(i)][0] ==
            doctest::Approx(2.5 * (Z.values()[static_cast<size_t>(i)][0] - Z.values()[0][0]))
                .epsilon(1e-12));
      CHECK(I.daggers()[static_cast<size_t>(i)](0, 0) == doctest::Approx(2.5));
    }
    CHECK(I.indices().r == doctest::Approx(1.0));
  }
  SUBCASE("scalar int x dx is exact for piecewise-linear lifts") {
    auto X = sin_lift(1 << 10);
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath I = crp_integral(Z, Z);
    const DiscretePath path = X->path();
    double worst = 0;
    for (int i = 0; i <= (1 << 10); ++i) {
      const double x = path.values[static_cast<size_t>(i)][0];
      const double x0 = path.values[0][0];
      worst = std::max(
          worst, std::abs(I.values()[static_cast<size_t>(i)][0] - 0.5 * (x * x - x0 * x0)));
    }
    CHECK(worst <= 1e-13);
  }
  SUBCASE("pure-area integrator reduces to a Riemann integral of the dagger") {
    Mat A(2, 2);
    A(0, 1) = 1.0;
    A(1, 0) = -1.0;
    const double c = 0.8;
    auto X = std::make_shared<RoughPath>(pure_area(A, c, Grid::uniform(1.0, 64), 2.0));
    const ControlledPath Z = canonical_crp(X);
    const int dv = 1, dw = 2;
    std::vector<Vec> vals(static_cast<size_t>(65), Vec{0.3, -0.7});
    Mat D(dv * dw, 2);
    D(0, 0) = 1.0;
    D(0, 1) = 2.0;
    D(1, 0) = -0.5;
    D(1, 1) = 0.25;
    std::vector<Mat> dags(static_cast<size_t>(65), D);
    const ControlledPath Y(X, std::move(vals), std::move(dags), dv, dw,
                           CrpIndices{2.0, 2.0, 1.0});
    const ControlledPath I = crp_integral(Y, Z);
    // Germ = sum_{u,w} D[(v,w)][u] * c dt A[u][w]: a pure drift.
    double rate = 0;
    for (int w = 0; w < dw; ++w)
      for (int u = 0; u < dw; ++u) rate += D(w, u) * c * A(u, w);
    for (int i = 0; i <= 64; ++i)
      CHECK(I.values()[static_cast<size_t>(i)][0] ==
            doctest::Approx(rate * (i / 64.0)).epsilon(1e-12));
  }
  SUBCASE("bilinearity on a fixed grid") {
    auto X = fbm_lift(128, 0.45, 2.2);
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath Y1 = crp_omega(make_field("tanh:dv=1,du=1"), Z);
    const ControlledPath Y2 = crp_omega(make_field("tanh:dv=1,du=1,scale=2.0"), Z);
    const ControlledPath direct = crp_integral(crp_add(Y1, Y2, 1.5, -2.0), Z);
    const ControlledPath a = crp_integral(Y1, Z);
    const ControlledPath b = crp_integral(Y2, Z);
    const ControlledPath combo = crp_add(a, b, 1.5, -2.0);
    double worst = 0;
    for (size_t i = 0; i < direct.values().size(); ++i)
      worst = std::max(worst, norm2(direct.values()[i] - combo.values()[i]));
    CHECK(worst <= 1e-12);
  }
  SUBCASE("dagger rule holds exactly") {
    auto X = fbm_lift(128, 0.45, 2.2);
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath Y = crp_omega(make_field("tanh:dv=1,du=1"), Z);
    const ControlledPath I = crp_integral(Y, Z);
    double worst = 0;
    for (size_t i = 0; i < I.values().size(); ++i)
      worst = std::max(worst, max_abs(I.daggers()[i] - matmul(Y.value_as_mat(static_cast<int>(i)),
                                                              Z.daggers()[i])));
    CHECK(worst == 0.0);
  }
  SUBCASE("compensated local bound: constants finite and stable under refinement") {
    auto Xc = sin_lift(128);
    auto Xf = sin_lift(256);
    const ControlledPath Zc = canonical_crp(Xc), Zf = canonical_crp(Xf);
    const ControlledPath Yc = crp_omega(make_field("tanh:dv=1,du=1"), Zc);
    const ControlledPath Yf = crp_omega(make_field("tanh:dv=1,du=1"), Zf);
    const CrpIntegralReport rc = crp_integral_check(Yc, Zc);
    const CrpIntegralReport rf = crp_integral_check(Yf, Zf);
    CHECK(rc.K_compensated > 0);
    CHECK(rf.K_compensated <= 1.5 * rc.K_compensated);
    CHECK(rc.K_compensated <= 1.5 * rf.K_compensated + 0.5 * rc.K_compensated);
    CHECK(rf.K_norm <= 1.5 * rc.K_norm + 1e-12);
  }
  SUBCASE("measured germ exponent approaches 3/p") {
    auto X = sin_lift(256);
    const ControlledPath Z = canonical_crp(X);
    const ControlledPath Y = crp_omega(make_field("tanh:dv=1,du=1"), Z);
    const FlatFamily zf = flat(Z);
    AdditiveGerm germ;
    germ.theta = 1.5;
    germ.eval = [&](int i, int j) {
      Vec g = matvec(Y.value_as_mat(i), Z.value_increment(i, j));
      const Mat zfv = zf.value(i, j);
      g[0] += Y.daggers()[static_cast<size_t>(i)](0, 0) * zfv(0, 0);
      return g;
    };
    const DefectScan scan = defect_scan(germ, X->grid());
    CHECK(scan.identifiable);
    CHECK(scan.theta_hat >= 1.5 - 0.2);
  }
  SUBCASE("matrix integrand against a 2-d smooth lift matches a Riemann oracle") {
    // x(t) = (sin(2 pi t), t^2 + 0.3 t): asymmetric components, closed-form
    // derivative for an independent fine quadrature of int f(x) dx.
    auto path_at = [](double t) {
      return Vec{std::sin(6.283185307179586 * t), t * t + 0.3 * t};
    };
    auto dpath_at = [](double t) {
      return Vec{6.283185307179586 * std::cos(6.283185307179586 * t), 2 * t + 0.3};
    };
    const int n = 1 << 12;
    DiscretePath x(Grid::uniform(1.0, n), 2);
    for (int i = 0; i <= n; ++i) x.values[static_cast<size_t>(i)] = path_at(x.grid.t(i));
    auto X = std::make_shared<RoughPath>(lift_piecewise_linear(x, 2.0));
    const ControlledPath Z = canonical_crp(X);
    const VectorField f = make_field("tanh:dv=2,du=2,scale=0.9");
    const ControlledPath I = crp_integral(crp_omega(f, Z), Z);

    // Trapezoid quadrature of f(x(t)) x'(t) at 16x resolution.
    const int n_ref = 1 << 16;
    Vec ref(2, 0.0);
    Vec prev = matvec(f.value(path_at(0.0)), dpath_at(0.0));
    for (int k = 1; k <= n_ref; ++k) {
      const double t = static_cast<double>(k) / n_ref;
      const Vec cur = matvec(f.value(path_at(t)), dpath_at(t));
      for (int c = 0; c < 2; ++c)
        ref[static_cast<size_t>(c)] += 0.5 * (prev[static_cast<size_t>(c)] + cur[static_cast<size_t>(c)]) / n_ref;
      prev = cur;
    }
    CHECK(norm2(I.values().back() - ref) <= 1e-5);
  }
  SUBCASE("shape and regime validation") {
    auto X = sin_lift(32);
    auto X2 = sin_lift(32);
    const ControlledPath Z = canonical_crp(X);
    CHECK_THROWS_AS(crp_integral(canonical_crp(X2), Z), DimensionError);  // distinct base
    ControlledPath bad = canonical_crp(X);
    bad.indices() = CrpIndices{2.9, 2.9, 2.9};
    CHECK_THROWS_AS(crp_integral(bad, Z), RegimeError);
  }
}

TEST_CASE("controlled product") {
  auto X = sin_lift(128);
  const ControlledPath Z = canonical_crp(X);

  SUBCASE("multiplying by the constant 1 changes nothing") {
    const ControlledPath One = constant_crp(X, {1.0}, 1, 1, CrpIndices{2.0, 2.0, 1.0});
    const ControlledPath P = crp_product(One, Z, CrpProductMode::compose_linear);
    for (size_t i = 0; i < P.values().size(); ++i) {
      CHECK(P.values()[i] == Z.values()[i]);
      CHECK(max_abs(P.daggers()[i] - Z.daggers()[i]) == 0.0);
    }
  }
  SUBCASE("Leibniz dagger for the square of the canonical path") {
    const ControlledPath P = crp_product(Z, Z, CrpProductMode::compose_linear);
    for (size_t i = 0; i < P.values().size(); ++i)
      CHECK(P.daggers()[i](0, 0) == doctest::Approx(2.0 * Z.values()[i][0]).epsilon(1e-14));
  }
  SUBCASE("tensor mode matches outer products") {
    auto X2 = sin_lift(64, 2.0, 2);
    const ControlledPath Z2 = canonical_crp(X2);
    const ControlledPath P = crp_product(Z2, Z2, CrpProductMode::tensor);
    CHECK(P.rows() == 2);
    CHECK(P.cols() == 2);
    for (size_t i = 0; i < P.values().size(); ++i) {
      const Vec& z = Z2.values()[i];
      CHECK(P.values()[i][1] == doctest::Approx(z[0] * z[1]));
    }
  }
  SUBCASE("remainder of a product keeps a finite p/2-rate norm on rough lifts") {
    auto Xr = fbm_lift(256, 0.4, 2.6);
    const ControlledPath Zr = canonical_crp(Xr);
    const ControlledPath P = crp_product(Zr, Zr, CrpProductMode::compose_linear);
    const CrpNorms norms = crp_norms(P);
    CHECK(std::isfinite(norms.sharp_r));
    CHECK(norms.sharp_r > 0);
    CHECK(P.indices().r == doctest::Approx(1.3));
  }
}

TEST_CASE("omega map on controlled paths") {
  auto X = fbm_lift(256, 0.42, 2.3, 1, 9);
  const ControlledPath Z = canonical_crp(X);

  SUBCASE("constant field") {
    const ControlledPath F = crp_omega(make_field("const:dv=1,du=1,c=2"), Z);
    for (size_t i = 0; i < F.values().size(); ++i) {
      CHECK(F.values()[i][0] == 2.0);
      CHECK(max_abs(F.daggers()[i]) == 0.0);
    }
    CHECK(crp_norms(F).sharp_r == 0.0);
  }
  SUBCASE("linear field acts diagonally") {
    const ControlledPath F = crp_omega(make_field("linear:lambda=-0.5"), Z);
    for (size_t i = 0; i < F.values().size(); ++i) {
      CHECK(F.values()[i][0] == doctest::Approx(-0.5 * Z.values()[i][0]));
      CHECK(F.daggers()[i](0, 0) == doctest::Approx(-0.5 * Z.daggers()[i](0, 0)));
    }
    CHECK(crp_norms(F).sharp_r == doctest::Approx(0.5 * crp_norms(Z).sharp_r).epsilon(1e-10));
  }
  SUBCASE("remainder matches the Taylor formula") {
    CHECK(crp_omega_remainder_check(make_field("tanh:dv=1,du=1"), Z) <= 1e-8);
    CHECK(crp_omega_remainder_check(make_field("linear:lambda=0.7"), Z) <= 1e-13);
  }
  SUBCASE("index bookkeeping follows the Q-space") {
    const ControlledPath F = crp_omega(make_field("tanh:dv=1,du=1"), Z, 0.5);
    CHECK(F.indices().p == Z.indices().p);
    CHECK(F.indices().q == doctest::Approx(Z.indices().p / 0.5));
    CHECK(F.indices().r == doctest::Approx(std::max(Z.indices().r, Z.indices().p / 1.5)));
  }
  SUBCASE("fields without derivatives are rejected") {
    CHECK_THROWS_AS(crp_omega(make_field("oddpow-map:gamma=0.5"), Z), RegimeError);
  }
}

TEST_CASE("starred subspace is preserved") {
  auto X = sin_lift(128);  // sin driver starts at 0
  const ControlledPath Z = canonical_crp(X);
  const ControlledPath I = crp_integral(canonical_crp(X), Z);
  REQUIRE(norm2(I.values().front()) == 0.0);
  REQUIRE(max_abs(I.daggers().front()) == 0.0);

  const ControlledPath P = crp_product(Z, I, CrpProductMode::compose_linear);
  CHECK(norm2(P.values().front()) == 0.0);
  CHECK(max_abs(P.daggers().front()) == 0.0);

  const ControlledPath T = crp_product(Z, I, CrpProductMode::tensor);
  CHECK(norm2(T.values().front()) == 0.0);
  CHECK(max_abs(T.daggers().front()) == 0.0);

  const ControlledPath I2 = crp_integral(crp_omega(make_field("tanh:dv=1,du=1"), Z), Z);
  CHECK(norm2(I2.values().front()) == 0.0);
}
