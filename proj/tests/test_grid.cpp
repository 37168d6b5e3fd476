#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rp/drivers.hpp"
#include "rp/grid.hpp"
#include "rp/rng.hpp"

using namespace rp;

namespace {

DiscretePath scalar_path(const Grid& g, const std::function<double(double)>& f) {
  DiscretePath x(g, 1);
  for (int i = 0; i < g.size(); ++i) x.values[static_cast<size_t>(i)][0] = f(g.t(i));
  return x;
}

DiscretePath random_path(const Grid& g, int dim, unsigned long long seed) {
  CounterRng rng(seed, 11);
  DiscretePath x(g, dim);
  for (int i = 0; i < g.size(); ++i)
    for (int c = 0; c < dim; ++c) x.values[static_cast<size_t>(i)][static_cast<size_t>(c)] =
        2 * rng.uniform() - 1;
  return x;
}

}  // namespace

TEST_CASE("grid construction and refinement") {
  const Grid g = Grid::uniform(1.0, 8);
  CHECK(g.size() == 9);
  CHECK(g.t(0) == 0.0);
  CHECK(g.horizon() == 1.0);

  const Grid fine = g.refine();
  CHECK(fine.steps() == 16);
  // Refinement keeps every original instant.
  for (int i = 0; i < g.size(); ++i) CHECK(fine.t(2 * i) == g.t(i));
  CHECK(fine.coarsen(2) == g);

  CHECK_THROWS_AS(Grid({0.0, 0.5, 0.5, 1.0}), InvalidGridError);
  CHECK_THROWS_AS(Grid({0.1, 0.5, 1.0}), InvalidGridError);
  CHECK_THROWS_AS(Grid({0.0}), InvalidGridError);
}

TEST_CASE("difference control is super-additive on random triples") {
  const ControlFn w;
  CHECK(w.validate(1.0, 10000, 42) <= 1e-15);
  CHECK(w(0.3, 0.3) == 0.0);
}

TEST_CASE("pvar_norm closed forms") {
  const Grid g = Grid::uniform(1.0, 64);
  const ControlFn w;

  SUBCASE("linear path, p = 1, gives |c|") {
    const double c = -2.5;
    const DiscretePath x = scalar_path(g, [c](double t) { return c * t; });
    CHECK(pvar_norm(x, 1.0, w) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  }
  SUBCASE("constant path vanishes for any p") {
    const DiscretePath x = scalar_path(g, [](double) { return 3.0; });
    CHECK(pvar_norm(x, 1.0, w) == 0.0);
    CHECK(pvar_norm(x, 2.7, w) == 0.0);
    CHECK(full_norm(x, 2.0, w) == doctest::Approx(3.0));
  }
  SUBCASE("sqrt(t) with p = 2: supremum attained at s = 0") {
    const DiscretePath x = scalar_path(g, [](double t) { return std::sqrt(t); });
    // Independent oracle: exhaustive pair scan.
    double oracle = 0;
    int arg_i = -1;
    for (int i = 0; i < g.size(); ++i)
      for (int j = i + 1; j < g.size(); ++j) {
        const double v = std::abs(x.values[static_cast<size_t>(j)][0] - x.values[static_cast<size_t>(i)][0]) /
                         std::sqrt(g.t(j) - g.t(i));
        if (v > oracle) {
          oracle = v;
          arg_i = i;
        }
      }
    CHECK(arg_i == 0);
    CHECK(oracle == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pvar_norm(x, 2.0, w) == doctest::Approx(oracle).epsilon(1e-14));
  }
}

TEST_CASE("full_norm composes the two oracles on a random path") {
  const Grid g = Grid::uniform(1.0, 32);
  const ControlFn w;
  const DiscretePath x = random_path(g, 3, 7);
  CHECK(full_norm(x, 2.0, w) ==
        doctest::Approx(norm2(x.values.front()) + pvar_norm(x, 2.0, w)));
}

TEST_CASE("degenerate control signals an infinite norm") {
  const Grid g = Grid::uniform(1.0, 4);
  const DiscretePath x = scalar_path(g, [](double t) { return t; });
  const ControlFn zero_w([](double, double) { return 0.0; });
  CHECK(std::isinf(pvar_norm(x, 2.0, zero_w)));
}

TEST_CASE("sup-norm embedding") {
  const Grid g = Grid::uniform(1.0, 128);
  const ControlFn w;
  SUBCASE("constant path: zero slack") {
    const DiscretePath x = scalar_path(g, [](double) { return -1.5; });
    const auto rep = sup_embedding_check(x, 2.0, w);
    CHECK(rep.holds);
    CHECK(rep.slack == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("linear path with p = 1: equality at t = T") {
    const DiscretePath x = scalar_path(g, [](double t) { return 2.0 * t; });
    const auto rep = sup_embedding_check(x, 1.0, w);
    CHECK(rep.holds);
    CHECK(rep.slack == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("fBm sample: positive slack") {
    DriverSpec spec;
    spec.kind = DriverSpec::Kind::fbm;
    spec.H = 0.6;
    spec.N = 256;
    spec.seed = 3;
    const DiscretePath x = sample_fbm(spec);
    const auto rep = sup_embedding_check(x, 2.0, w);
    CHECK(rep.holds);
    CHECK(rep.slack > 0);
  }
}

TEST_CASE("pvar properties") {
  const Grid g = Grid::uniform(1.0, 64);
  const ControlFn w;
  const DiscretePath x = random_path(g, 2, 19);

  SUBCASE("monotone under grid coarsening") {
    const double fine = pvar_norm(x, 2.0, w);
    for (int stride : {2, 4, 8}) {
      const DiscretePath sub = x.subsample(stride);
      CHECK(pvar_norm(sub, 2.0, w) <= fine + 1e-14);
    }
  }
  SUBCASE("embedding C_p into C_q for q >= p") {
    const double p = 1.5, q = 3.0;
    const double np = pvar_norm(x, p, w);
    const double nq = pvar_norm(x, q, w);
    CHECK(nq <= np * std::pow(w(0, 1.0), 1.0 / q - 1.0 / p) + 1e-12);
  }
  SUBCASE("homogeneity") {
    DiscretePath sx = x;
    const double lam = -3.25;
    for (auto& v : sx.values)
      for (double& c : v) c *= lam;
    CHECK(pvar_norm(sx, 2.0, w) == doctest::Approx(std::abs(lam) * pvar_norm(x, 2.0, w)));
  }
}

TEST_CASE("scan policy switches to dyadic pairs past the exact limit") {
  CHECK(scan_is_exact(4096));
  CHECK(!scan_is_exact(4097));
  int count = 0;
  for_each_scan_pair(5000, [&](int i, int j) {
    CHECK(i < j);
    ++count;
  });
  // Dyadic budget is O(N log N), far below the 12.5M exact pairs.
  CHECK(count < 70000);

  // For a linear path every pair ratio equals |c| at p = 1, so the dyadic
  // subsample loses nothing there.
  const Grid big = Grid::uniform(1.0, 8192);
  const DiscretePath lin = scalar_path(big, [](double t) { return -1.25 * t; });
  CHECK(pvar_norm(lin, 1.0, ControlFn()) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("interpolate_to moves a path to a finer grid") {
  const Grid coarse = Grid::uniform(1.0, 4);
  const Grid fine = Grid::uniform(1.0, 8);
  const DiscretePath x = scalar_path(coarse, [](double t) { return t * t; });
  const DiscretePath xi = interpolate_to(x, fine);
  CHECK(xi.values[2][0] == doctest::Approx(0.0625));          // grid point carried over
  CHECK(xi.values[1][0] == doctest::Approx(0.5 * 0.0625));    // midpoint interpolated
}
