#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rp/drivers.hpp"

using namespace rp;

TEST_CASE("driver spec strings") {
  const DriverSpec s = DriverSpec::parse("fbm:H=0.4,d=2,N=4096,seed=7");
  CHECK(s.kind == DriverSpec::Kind::fbm);
  CHECK(s.H == 0.4);
  CHECK(s.d == 2);
  CHECK(s.N == 4096);
  CHECK(s.seed == 7);
  CHECK_THROWS_AS(DriverSpec::parse("brownian-ish"), ConfigError);
  CHECK_THROWS_AS(DriverSpec::parse("fbm:H=1.5"), ConfigError);
}

TEST_CASE("smooth paths") {
  DriverSpec s;
  s.kind = DriverSpec::Kind::smooth_poly;
  s.d = 2;
  s.N = 4;
  const DiscretePath x = smooth_path(s);
  CHECK(x.values.back()[0] == doctest::Approx(1.0));  // (t, t^2) at t = 1
  CHECK(x.values.back()[1] == doctest::Approx(1.0));

  s.kind = DriverSpec::Kind::smooth_sin;
  const DiscretePath y = smooth_path(s);
  CHECK(norm2(y.values.front()) == 0.0);  // sin paths start at the origin

  // Refinement consistency: closed form evaluated on a sub-grid agrees.
  s.N = 64;
  const DiscretePath fine = smooth_path(s);
  s.N = 32;
  const DiscretePath coarse = smooth_path(s);
  for (int i = 0; i < coarse.grid.size(); ++i)
    CHECK(coarse.values[static_cast<size_t>(i)] == fine.values[static_cast<size_t>(2 * i)]);
}

TEST_CASE("piecewise-linear lift basics") {
  SUBCASE("single segment") {
    DiscretePath x(Grid::uniform(1.0, 1), 2);
    x.values[1] = {3.0, -1.0};
    const RoughPath X = lift_piecewise_linear(x, 2.0);
    const Tensor2& s = X.steps()[0];
    CHECK(max_abs(s.level2 - 0.5 * outer(s.level1, s.level1)) == 0.0);
  }
  SUBCASE("constant path lifts to identity increments") {
    DiscretePath x(Grid::uniform(1.0, 8), 2);
    for (auto& v : x.values) v = {1.0, 2.0};
    const RoughPath X = lift_piecewise_linear(x, 2.0);
    CHECK(X.increment(0, 8).norm() == 0.0);
  }
  SUBCASE("lift commutes with dilation of the underlying path") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::smooth_sin;
    s.d = 2;
    s.N = 32;
    DiscretePath x = smooth_path(s);
    const double eps = 0.75;
    DiscretePath ex = x;
    for (auto& v : ex.values)
      for (double& c : v) c *= eps;
    const RoughPath a = lift_piecewise_linear(ex, 2.0);
    const RoughPath b = dilate(lift_piecewise_linear(x, 2.0), eps);
    double gap = 0;
    for (int j = 1; j <= 32; ++j) {
      gap = std::max(gap, norm_inf(a.increment(0, j).level1 - b.increment(0, j).level1));
      gap = std::max(gap, max_abs(a.increment(0, j).level2 - b.increment(0, j).level2));
    }
    CHECK(gap <= 1e-15);
  }
}

TEST_CASE("pure area rough path") {
  Mat A(2, 2);
  A(0, 1) = 1.0;
  A(1, 0) = -1.0;
  const Grid g = Grid::uniform(2.0, 16);

  SUBCASE("c = 0 gives the zero rough path") {
    CHECK(pure_area(A, 0.0, g).increment(0, 16).norm() == 0.0);
  }
  SUBCASE("level2 is additive in the interval length") {
    const double c = 0.7;
    const RoughPath X = pure_area(A, c, g);
    for (int i = 0; i < 16; ++i)
      for (int j = i + 1; j <= 16; ++j) {
        const Tensor2 inc = X.increment(i, j);
        CHECK(norm2(inc.level1) == 0.0);
        CHECK(max_abs(inc.level2 - c * (g.t(j) - g.t(i)) * A) <= 1e-15);
      }
    CHECK(chen_defect(X) <= 1e-15);
  }
  SUBCASE("non-antisymmetric input is rejected") {
    Mat B(2, 2);
    B(0, 1) = 1.0;
    CHECK_THROWS_AS(pure_area(B, 1.0, g), DimensionError);
  }
}

TEST_CASE("fBm sampling") {
  SUBCASE("deterministic given the seed") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.4;
    s.N = 128;
    s.d = 2;
    s.seed = 99;
    const DiscretePath a = sample_fbm(s);
    const DiscretePath b = sample_fbm(s);
    CHECK(a.values == b.values);
    s.seed = 100;
    CHECK(sample_fbm(s).values != a.values);
  }
  SUBCASE("H = 1/2 increments are independent with variance dt") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.5;
    s.N = 16;
    const int n_mc = 20000;
    double var = 0, cross = 0;
    for (int seed = 0; seed < n_mc; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      const DiscretePath x = sample_fbm(s);
      const double d1 = x.increment(4, 5)[0];
      const double d2 = x.increment(10, 11)[0];
      var += d1 * d1;
      cross += d1 * d2;
    }
    var /= n_mc;
    cross /= n_mc;
    CHECK(var == doctest::Approx(1.0 / 16).epsilon(0.05));
    CHECK(std::abs(cross) <= 3.0 / 16 / std::sqrt(static_cast<double>(n_mc)));
  }
  SUBCASE("H = 0.4 marginal and covariance match the fBm law within 5 percent") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.4;
    s.N = 64;
    const int n_mc = 10000;
    const int i_half = 32, i_end = 64;
    double m_end = 0, m_cov = 0;
    for (int seed = 0; seed < n_mc; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      const DiscretePath x = sample_fbm(s);
      m_end += x.values[i_end][0] * x.values[i_end][0];
      m_cov += x.values[i_half][0] * x.values[i_end][0];
    }
    m_end /= n_mc;
    m_cov /= n_mc;
    const double H = 0.4;
    auto cov = [H](double t, double u) {
      return 0.5 * (std::pow(t, 2 * H) + std::pow(u, 2 * H) - std::pow(std::abs(t - u), 2 * H));
    };
    CHECK(m_end == doctest::Approx(cov(1.0, 1.0)).epsilon(0.05));
    CHECK(m_cov == doctest::Approx(cov(0.5, 1.0)).epsilon(0.05));
  }
  SUBCASE("Cholesky fallback agrees with the circulant route in law") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.35;
    s.N = 32;
    const int n_mc = 4000;
    double var_c = 0, var_ch = 0;
    for (int seed = 0; seed < n_mc; ++seed) {
      s.seed = static_cast<std::uint64_t>(seed);
      var_c += std::pow(sample_fbm(s).values.back()[0], 2);
      var_ch += std::pow(sample_fbm_cholesky(s).values.back()[0], 2);
    }
    var_c /= n_mc;
    var_ch /= n_mc;
    CHECK(var_c == doctest::Approx(1.0).epsilon(0.08));
    CHECK(var_ch == doctest::Approx(1.0).epsilon(0.08));
  }
  SUBCASE("power-of-two and range validation") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.N = 100;
    CHECK_THROWS_AS(sample_fbm(s), ConfigError);
    s.N = 128;
    s.H = 0.0;
    CHECK_THROWS_AS(sample_fbm(s), ConfigError);
  }
  SUBCASE("rough driver guards the lift regime") {
    DriverSpec s;
    s.kind = DriverSpec::Kind::fbm;
    s.H = 0.25;  // below the p in [2,3) lift threshold
    s.N = 64;
    CHECK_THROWS_AS(make_rough_driver(s, 2.5), RegimeError);
  }
}
