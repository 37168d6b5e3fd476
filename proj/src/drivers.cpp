#include "rp/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "rp/rng.hpp"

namespace rp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2 FFT, n a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 1.0 : -1.0) * kTwoPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= static_cast<double>(n);
}

// Autocovariance of unit-spacing fractional Gaussian noise.
double fgn_cov(int k, double H) {
  const double a = std::abs(static_cast<double>(k));
  return 0.5 * (std::pow(a + 1, 2 * H) - 2 * std::pow(a, 2 * H) + std::pow(std::abs(a - 1), 2 * H));
}

// One fGn component of length n via Davies-Harte. Returns false if the
// circulant eigenvalues go negative.
bool fgn_circulant(int n, double H, CounterRng& rng, std::vector<double>& out) {
  const size_t m = 2 * static_cast<size_t>(n);
  std::vector<std::complex<double>> c(m);
  for (int k = 0; k <= n; ++k) c[static_cast<size_t>(k)] = fgn_cov(k, H);
  for (int k = 1; k < n; ++k) c[m - static_cast<size_t>(k)] = fgn_cov(k, H);
  fft(c, false);
  std::vector<double> lambda(m);
  for (size_t k = 0; k < m; ++k) {
    lambda[k] = c[k].real();
    if (lambda[k] < -1e-9) return false;
    lambda[k] = std::max(lambda[k], 0.0);
  }
  std::vector<std::complex<double>> z(m);
  z[0] = std::sqrt(lambda[0]) * rng.normal();
  z[m / 2] = std::sqrt(lambda[m / 2]) * rng.normal();
  for (size_t k = 1; k < m / 2; ++k) {
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    const std::complex<double> v = std::sqrt(0.5 * lambda[k]) * std::complex<double>(g1, g2);
    z[k] = v;
    z[m - k] = std::conj(v);
  }
  fft(z, false);
  out.resize(static_cast<size_t>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int k = 0; k < n; ++k) out[static_cast<size_t>(k)] = z[static_cast<size_t>(k)].real() * scale;
  return true;
}

// Cholesky of the fGn covariance; O(n^3), reserved for small n.
void fgn_cholesky(int n, double H, CounterRng& rng, std::vector<double>& out) {
  std::vector<double> L(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  auto at = [n](std::vector<double>& a, int i, int j) -> double& {
    return a[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = fgn_cov(i - j, H);
      for (int k = 0; k < j; ++k) s -= at(L, i, k) * at(L, j, k);
      if (i == j)
        at(L, i, i) = std::sqrt(std::max(s, 0.0));
      else
        at(L, i, j) = at(L, j, j) > 0 ? s / at(L, j, j) : 0.0;
    }
  }
  std::vector<double> g(static_cast<size_t>(n));
  for (double& v : g) v = rng.normal();
  out.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 0; k <= i; ++k) s += at(L, i, k) * g[static_cast<size_t>(k)];
    out[static_cast<size_t>(i)] = s;
  }
}

}  // namespace

DriverSpec DriverSpec::parse(const std::string& spec) {
  DriverSpec out;
  std::string kind = spec;
  std::string rest;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    kind = spec.substr(0, pos);
    rest = spec.substr(pos + 1);
  }
  if (kind == "smooth-sin")
    out.kind = Kind::smooth_sin;
  else if (kind == "smooth-poly")
    out.kind = Kind::smooth_poly;
  else if (kind == "bm")
    out.kind = Kind::bm;
  else if (kind == "fbm")
    out.kind = Kind::fbm;
  else if (kind == "pure-area")
    out.kind = Kind::pure_area;
  else
    throw ConfigError("unknown driver kind: " + kind);

  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("driver spec: expected key=value, got " + item);
    const std::string key = item.substr(0, eq);
    const double val = std::stod(item.substr(eq + 1));
    if (key == "d")
      out.d = static_cast<int>(val);
    else if (key == "N")
      out.N = static_cast<int>(val);
    else if (key == "H")
      out.H = val;
    else if (key == "seed")
      out.seed = static_cast<std::uint64_t>(val);
    else if (key == "T")
      out.horizon = val;
    else
      out.params[key] = val;
  }
  if (out.kind == Kind::fbm && (out.H <= 0 || out.H > 1)) throw ConfigError("fbm: H must be in (0,1]");
  return out;
}

std::string DriverSpec::canonical_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::smooth_sin: os << "smooth-sin"; break;
    case Kind::smooth_poly: os << "smooth-poly"; break;
    case Kind::bm: os << "bm"; break;
    case Kind::fbm: os << "fbm"; break;
    case Kind::pure_area: os << "pure-area"; break;
  }
  os << ":d=" << d << ",N=" << N << ",T=" << horizon << ",seed=" << seed;
  if (kind == Kind::fbm) os << ",H=" << H;
  for (const auto& [k, v] : params) os << "," << k << "=" << v;
  return os.str();
}

DiscretePath smooth_path(const DriverSpec& spec) {
  const Grid g = Grid::uniform(spec.horizon, spec.N);
  DiscretePath out(g, spec.d);
  const double amp = spec.params.count("amp") ? spec.params.at("amp") : 1.0;
  const double freq = spec.params.count("freq") ? spec.params.at("freq") : 1.0;
  for (int i = 0; i < g.size(); ++i) {
    const double t = g.t(i);
    Vec& v = out.values[static_cast<size_t>(i)];
    for (int c = 0; c < spec.d; ++c) {
      if (spec.kind == DriverSpec::Kind::smooth_poly) {
        v[static_cast<size_t>(c)] = amp * std::pow(t, c + 1);
      } else {
        // Component c: amp * sin(2 pi freq (c+1) t + phase_c), phase staggers components.
        const double phase = c * 0.5;
        v[static_cast<size_t>(c)] = amp * std::sin(kTwoPi * freq * (c + 1) * t + phase) -
                                    amp * std::sin(phase);
      }
    }
  }
  return out;
}

DiscretePath sample_fbm(const DriverSpec& spec) {
  if (!is_pow2(spec.N)) throw ConfigError("fbm: N must be a power of two");
  if (spec.H <= 0 || spec.H >= 1) throw ConfigError("fbm: H must be in (0,1)");
  const Grid g = Grid::uniform(spec.horizon, spec.N);
  DiscretePath out(g, spec.d);
  const double dt_scale = std::pow(spec.horizon / spec.N, spec.H);
  for (int c = 0; c < spec.d; ++c) {
    CounterRng rng(spec.seed, 0x66626dULL + static_cast<std::uint64_t>(c));
    std::vector<double> noise;
    if (!fgn_circulant(spec.N, spec.H, rng, noise)) {
      if (spec.N > (1 << 11)) throw ConfigError("fbm: circulant embedding failed and N too large for Cholesky");
      rng.skip_to(0);
      fgn_cholesky(spec.N, spec.H, rng, noise);
    }
    double acc = 0;
    for (int i = 1; i <= spec.N; ++i) {
      acc += noise[static_cast<size_t>(i - 1)];
      out.values[static_cast<size_t>(i)][static_cast<size_t>(c)] = dt_scale * acc;
    }
  }
  return out;
}

DiscretePath sample_bm(const DriverSpec& spec) {
  DriverSpec s = spec;
  s.H = 0.5;
  return sample_fbm(s);
}

DiscretePath sample_fbm_cholesky(const DriverSpec& spec) {
  if (spec.N > (1 << 11)) throw ConfigError("fbm cholesky: N <= 2^11 required");
  if (spec.H <= 0 || spec.H >= 1) throw ConfigError("fbm: H must be in (0,1)");
  const Grid g = Grid::uniform(spec.horizon, spec.N);
  DiscretePath out(g, spec.d);
  const double dt_scale = std::pow(spec.horizon / spec.N, spec.H);
  for (int c = 0; c < spec.d; ++c) {
    CounterRng rng(spec.seed, 0x66626dULL + static_cast<std::uint64_t>(c));
    std::vector<double> noise;
    fgn_cholesky(spec.N, spec.H, rng, noise);
    double acc = 0;
    for (int i = 1; i <= spec.N; ++i) {
      acc += noise[static_cast<size_t>(i - 1)];
      out.values[static_cast<size_t>(i)][static_cast<size_t>(c)] = dt_scale * acc;
    }
  }
  return out;
}

RoughPath lift_piecewise_linear(const DiscretePath& x, double p, ControlFn omega) {
  x.check();
  if (x.grid.size() < 2) throw InvalidGridError("lift: need at least 2 instants");
  std::vector<Tensor2> steps;
  steps.reserve(static_cast<size_t>(x.grid.steps()));
  for (int k = 0; k < x.grid.steps(); ++k) {
    const Vec v = x.increment(k, k + 1);
    Mat m = outer(v, v);
    m *= 0.5;
    steps.emplace_back(v, std::move(m));
  }
  return RoughPath(x.grid, x.values.front(), std::move(steps), p, std::move(omega));
}

RoughPath pure_area(const Mat& A, double c, const Grid& grid, double p, ControlFn omega) {
  const int d = A.rows();
  if (A.cols() != d) throw DimensionError("pure_area: square matrix required");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::abs(A(i, j) + A(j, i)) > 1e-12 * (1 + max_abs(A)))
        throw DimensionError("pure_area: matrix must be antisymmetric");
  std::vector<Tensor2> steps;
  steps.reserve(static_cast<size_t>(grid.steps()));
  for (int k = 0; k < grid.steps(); ++k) {
    Tensor2 s(d);
    s.level2 = A * (c * (grid.t(k + 1) - grid.t(k)));
    steps.push_back(std::move(s));
  }
  return RoughPath(grid, Vec(static_cast<size_t>(d), 0.0), std::move(steps), p, std::move(omega));
}

RoughPath make_rough_driver(const DriverSpec& spec, double p) {
  switch (spec.kind) {
    case DriverSpec::Kind::smooth_sin:
    case DriverSpec::Kind::smooth_poly:
      return lift_piecewise_linear(smooth_path(spec), p);
    case DriverSpec::Kind::bm:
      return lift_piecewise_linear(sample_bm(spec), p);
    case DriverSpec::Kind::fbm: {
      if (p >= 2.0 && spec.H <= 1.0 / 3.0)
        throw RegimeError("fbm lift into the rough solver requires H > 1/3");
      return lift_piecewise_linear(sample_fbm(spec), p);
    }
    case DriverSpec::Kind::pure_area: {
      const int d = std::max(spec.d, 2);
      Mat A(d, d);
      A(0, 1) = 1.0;
      A(1, 0) = -1.0;
      const double c = spec.params.count("c") ? spec.params.at("c") : 1.0;
      return pure_area(A, c, Grid::uniform(spec.horizon, spec.N), p);
    }
  }
  throw ConfigError("make_rough_driver: unhandled kind");
}

}  // namespace rp
