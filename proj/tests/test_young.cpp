#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rp/drivers.hpp"
#include "rp/rng.hpp"
#include "rp/young.hpp"

using namespace rp;

namespace {

DiscretePath scalar_path(const Grid& g, const std::function<double(double)>& f) {
  DiscretePath x(g, 1);
  for (int i = 0; i < g.size(); ++i) x.values[static_cast<size_t>(i)][0] = f(g.t(i));
  return x;
}

const double kTwoPi = 6.283185307179586;

}  // namespace

TEST_CASE("young integral closed forms") {
  const ControlFn w;
  const Grid g = Grid::uniform(1.0, 256);
  const DiscretePath x = scalar_path(g, [](double t) { return std::sin(kTwoPi * t); });

  SUBCASE("constant integrand transports increments") {
    DiscretePath y(g, 1);
    for (auto& v : y.values) v[0] = -1.5;
    const DiscretePath I = young_integral(y, x, 1.0, 1.0, w);
    for (int i = 0; i < g.size(); ++i)
      CHECK(I.values[static_cast<size_t>(i)][0] ==
            doctest::Approx(-1.5 * (x.values[static_cast<size_t>(i)][0] - x.values[0][0]))
                .epsilon(1e-13));
  }
  SUBCASE("int x dx hits the calculus value on any grid") {
    // The trapezoid germ integrates the piecewise-linear interpolant
    // exactly, and int x dx = (x_T^2 - x_0^2)/2 for every continuous
    // finite-variation path.
    for (int n : {16, 256, 1 << 12}) {
      const Grid gn = Grid::uniform(1.0, n);
      const DiscretePath xn = scalar_path(gn, [](double t) { return std::sin(kTwoPi * t); });
      const DiscretePath I = young_integral(xn, xn, 1.0, 1.0, w);
      double worst = 0;
      for (int i = 0; i < gn.size(); ++i) {
        const double exact =
            0.5 * (xn.values[static_cast<size_t>(i)][0] * xn.values[static_cast<size_t>(i)][0] -
                   xn.values[0][0] * xn.values[0][0]);
        worst = std::max(worst, std::abs(I.values[static_cast<size_t>(i)][0] - exact));
      }
      CHECK(worst <= 1e-13);
    }
  }
  SUBCASE("bilinearity on a fixed grid") {
    const DiscretePath y = scalar_path(g, [](double t) { return std::cos(kTwoPi * 2 * t); });
    DiscretePath combo(g, 1);
    for (int i = 0; i < g.size(); ++i)
      combo.values[static_cast<size_t>(i)][0] = 2.0 * x.values[static_cast<size_t>(i)][0] -
                                                0.5 * y.values[static_cast<size_t>(i)][0];
    const DiscretePath lhs = young_integral(combo, x, 1.0, 1.0, w);
    const DiscretePath a = young_integral(x, x, 1.0, 1.0, w);
    const DiscretePath b = young_integral(y, x, 1.0, 1.0, w);
    double worst = 0;
    for (int i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(lhs.values[static_cast<size_t>(i)][0] -
                                       (2.0 * a.values[static_cast<size_t>(i)][0] -
                                        0.5 * b.values[static_cast<size_t>(i)][0])));
    CHECK(worst <= 1e-13);
  }
  SUBCASE("Chasles additivity is exact") {
    const DiscretePath I = young_integral(x, x, 1.0, 1.0, w);
    double worst = 0;
    for (int i = 0; i < 200; i += 13)
      for (int j = i + 1; j < 230; j += 17)
        for (int k = j + 1; k <= 256; k += 11)
          worst = std::max(worst, std::abs((I.values[static_cast<size_t>(k)][0] -
                                            I.values[static_cast<size_t>(i)][0]) -
                                           (I.values[static_cast<size_t>(j)][0] -
                                            I.values[static_cast<size_t>(i)][0]) -
                                           (I.values[static_cast<size_t>(k)][0] -
                                            I.values[static_cast<size_t>(j)][0])));
    CHECK(worst <= 1e-14);
  }
}

TEST_CASE("integration by parts holds exactly on random paths") {
  // The trapezoid germ telescopes: int y dx + int x dy = (xy)_T - (xy)_0 at
  // machine precision for any scalar data.
  const ControlFn w;
  const Grid g = Grid::uniform(1.0, 200);
  CounterRng rng(77, 4);
  for (int trial = 0; trial < 20; ++trial) {
    DiscretePath x(g, 1), y(g, 1);
    for (int i = 0; i < g.size(); ++i) {
      x.values[static_cast<size_t>(i)][0] = 2 * rng.uniform() - 1;
      y.values[static_cast<size_t>(i)][0] = 2 * rng.uniform() - 1;
    }
    const DiscretePath a = young_integral(y, x, 1.0, 1.0, w);
    const DiscretePath b = young_integral(x, y, 1.0, 1.0, w);
    const double lhs = a.values.back()[0] + b.values.back()[0];
    const double rhs = x.values.back()[0] * y.values.back()[0] - x.values[0][0] * y.values[0][0];
    CHECK(std::abs(lhs - rhs) <= 1e-14);
  }
}

TEST_CASE("matrix-valued integrand") {
  const ControlFn w;
  const Grid g = Grid::uniform(1.0, 64);
  // y in L(R^2, R): row vector (t, 2t); x = (t, t^2).
  DiscretePath y(g, 2), x(g, 2);
  for (int i = 0; i < g.size(); ++i) {
    const double t = g.t(i);
    y.values[static_cast<size_t>(i)] = {t, 2 * t};
    x.values[static_cast<size_t>(i)] = {t, t * t};
  }
  const DiscretePath I = young_integral(y, x, 1.0, 1.0, w);
  // int_0^1 (t dt + 2t d(t^2)) = 1/2 + 4/3.
  CHECK(I.dim == 1);
  CHECK(I.values.back()[0] == doctest::Approx(0.5 + 4.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("young bound constant") {
  const ControlFn w;
  SUBCASE("constant integrand gives zero") {
    const Grid g = Grid::uniform(1.0, 64);
    const DiscretePath x = scalar_path(g, [](double t) { return std::sin(kTwoPi * t); });
    DiscretePath y(g, 1);
    for (auto& v : y.values) v[0] = 4.0;
    CHECK(young_bound_check(y, x, 1.0, 1.0, w) == 0.0);
  }
  SUBCASE("smooth sin pair measures K <= 10 at N = 2^10") {
    const Grid g = Grid::uniform(1.0, 1 << 10);
    const DiscretePath x = scalar_path(g, [](double t) { return std::sin(kTwoPi * t); });
    const DiscretePath y = scalar_path(g, [](double t) { return std::cos(kTwoPi * t); });
    const double K = young_bound_check(y, x, 1.0, 1.0, w);
    CHECK(K > 0);
    CHECK(K <= 10.0);
  }
  SUBCASE("coarse-to-fine convergence order on a rough pair") {
    // Expected order at least 1/p + 1/q - 1 = 0.5 for H = 0.8 data.
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.8;
    s.N = 1 << 10;
    s.d = 2;  // independent integrand and integrator components
    s.seed = 77;
    const DiscretePath both = sample_fbm(s);
    auto component = [&](const DiscretePath& src, int c) {
      DiscretePath out(src.grid, 1);
      for (size_t i = 0; i < src.values.size(); ++i) out.values[i][0] = src.values[i][static_cast<size_t>(c)];
      return out;
    };
    const double p = 1.0 / 0.75;
    const double ref =
        young_integral(component(both, 0), component(both, 1), p, p, w).values.back()[0];
    std::vector<double> errs;
    for (int stride : {8, 4, 2}) {
      const DiscretePath sub = both.subsample(stride);
      errs.push_back(std::abs(
          young_integral(component(sub, 0), component(sub, 1), p, p, w).values.back()[0] - ref));
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    const double order = 0.5 * std::log2(errs[0] / errs[2]);
    CHECK(order >= 0.4);
  }
  SUBCASE("fBm pair with p = q = 1/0.75: K stable across refinement") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.8;
    s.N = 1 << 9;
    s.seed = 21;
    const DiscretePath fine = sample_fbm(s);
    const DiscretePath coarse = fine.subsample(2);
    const double p = 1.0 / 0.75;
    const double k_f = young_bound_check(fine, fine, p, p, w);
    const double k_c = young_bound_check(coarse, coarse, p, p, w);
    CHECK(k_f <= 1.3 * k_c + 0.3 * k_f);
    CHECK(k_c <= 1.3 * k_f);
  }
}

TEST_CASE("p-variation of the output") {
  // ||int y dx||_p <= ||y||_sup ||x||_p + K ||y||_q ||x||_p omega^{1/q}.
  const ControlFn w;
  const Grid g = Grid::uniform(1.0, 256);
  const DiscretePath x = scalar_path(g, [](double t) { return std::sin(kTwoPi * t); });
  const DiscretePath y = scalar_path(g, [](double t) { return std::cos(kTwoPi * 3 * t); });
  const double p = 1.0, q = 1.0;
  const DiscretePath I = young_integral(y, x, p, q, w);
  const double K = young_bound_check(y, x, p, q, w);
  double y_sup = 0;
  for (const auto& v : y.values) y_sup = std::max(y_sup, std::abs(v[0]));
  const double bound = y_sup * pvar_norm(x, p, w) +
                       K * pvar_norm(y, q, w) * pvar_norm(x, p, w) * std::pow(w(0, 1), 1.0 / q);
  CHECK(pvar_norm(I, p, w) <= bound * (1 + 1e-12));
}

TEST_CASE("grid handling") {
  const ControlFn w;
  const Grid fine = Grid::uniform(1.0, 64);
  const Grid coarse = Grid::uniform(1.0, 16);
  const DiscretePath x = scalar_path(fine, [](double t) { return t; });
  const DiscretePath y = scalar_path(coarse, [](double t) { return t * t; });

  SUBCASE("integrand is interpolated onto the integrator's grid, flagged") {
    YoungReport rep;
    const DiscretePath I = young_integral(y, x, 1.0, 1.0, w, &rep);
    CHECK(rep.interpolated);
    CHECK(I.values.back()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-2));
  }
  SUBCASE("integrator is never interpolated") {
    CHECK_THROWS_AS(young_integral(x, y, 1.0, 1.0, w), InvalidGridError);
  }
  SUBCASE("Young condition is enforced") {
    CHECK_THROWS_AS(young_integral(x, x, 2.5, 2.5, w), RegimeError);
  }
}
