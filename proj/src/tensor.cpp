#include "rp/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "rp/rng.hpp"

namespace rp {

Tensor2 tensor_mul(const Tensor2& a, const Tensor2& b) {
  if (a.dim() != b.dim()) throw DimensionError("tensor_mul: dimension mismatch");
  Tensor2 c(a.dim());
  c.level1 = a.level1 + b.level1;
  c.level2 = a.level2 + b.level2 + outer(a.level1, b.level1);
  return c;
}

Tensor2 tensor_inv(const Tensor2& a) {
  Tensor2 c(a.dim());
  for (size_t i = 0; i < a.level1.size(); ++i) c.level1[i] = -a.level1[i];
  c.level2 = outer(a.level1, a.level1) - a.level2;
  return c;
}

RoughPath::RoughPath(Grid grid, Vec start, std::vector<Tensor2> step_increments, double p,
                     ControlFn omega)
    : grid_(std::move(grid)),
      start_(std::move(start)),
      steps_(std::move(step_increments)),
      p_(p),
      control_(std::move(omega)),
      dim_(static_cast<int>(start_.size())) {
  if (static_cast<int>(steps_.size()) != grid_.steps())
    throw InvalidGridError("rough path: one step increment per grid interval required");
  for (const Tensor2& s : steps_)
    if (s.dim() != dim_) throw DimensionError("rough path: step dimension mismatch");
  prefix_.reserve(steps_.size() + 1);
  prefix_.push_back(Tensor2::identity(dim_));
  for (const Tensor2& s : steps_) prefix_.push_back(tensor_mul(prefix_.back(), s));
}

Tensor2 RoughPath::increment(int i, int j) const {
  if (i < 0 || j < i || j >= grid_.size()) throw InvalidGridError("increment: index out of range");
  if (i == j) return Tensor2::identity(dim_);
  if (j == i + 1) return steps_[static_cast<size_t>(i)];
  return tensor_mul(tensor_inv(prefix_[static_cast<size_t>(i)]), prefix_[static_cast<size_t>(j)]);
}

Vec RoughPath::level1(int i, int j) const {
  return prefix_[static_cast<size_t>(j)].level1 - prefix_[static_cast<size_t>(i)].level1;
}

DiscretePath RoughPath::path() const {
  DiscretePath out(grid_, dim_);
  for (int i = 0; i < grid_.size(); ++i)
    out.values[static_cast<size_t>(i)] = start_ + prefix_[static_cast<size_t>(i)].level1;
  return out;
}

RoughNorm rough_norm(const RoughPath& x) {
  const Grid& g = x.grid();
  const ControlFn& w = x.control();
  const double p = x.p();
  RoughNorm out;
  // Row scan keeps the level-2 reconstruction incremental: O(pairs * d^2).
  const int n = g.size();
  if (scan_is_exact(n)) {
    for (int i = 0; i + 1 < n; ++i) {
      Tensor2 acc = Tensor2::identity(x.dim());
      for (int j = i + 1; j < n; ++j) {
        acc = tensor_mul(acc, x.steps()[static_cast<size_t>(j - 1)]);
        const double om = w(g.t(i), g.t(j));
        if (om <= 0) continue;
        out.level1 = std::max(out.level1, norm2(acc.level1) / std::pow(om, 1.0 / p));
        out.level2 = std::max(out.level2, std::sqrt(frob_norm(acc.level2) / std::pow(om, 2.0 / p)));
      }
    }
  } else {
    for_each_scan_pair(n, [&](int i, int j) {
      const Tensor2 inc = x.increment(i, j);
      const double om = w(g.t(i), g.t(j));
      if (om <= 0) return;
      out.level1 = std::max(out.level1, norm2(inc.level1) / std::pow(om, 1.0 / p));
      out.level2 = std::max(out.level2, std::sqrt(frob_norm(inc.level2) / std::pow(om, 2.0 / p)));
    });
  }
  out.value = std::max(out.level1, out.level2);
  return out;
}

RoughPath dilate(const RoughPath& x, double eps) {
  std::vector<Tensor2> steps = x.steps();
  for (Tensor2& s : steps) {
    for (double& v : s.level1) v *= eps;
    s.level2 *= eps * eps;
  }
  return RoughPath(x.grid(), x.start(), std::move(steps), x.p(), x.control());
}

RoughPath translate(const RoughPath& x, const DiscretePath& h, double q) {
  h.check();
  if (!(h.grid == x.grid())) throw InvalidGridError("translate: h must live on the rough path's grid");
  if (h.dim != x.dim()) throw DimensionError("translate: dimension mismatch");
  if (1.0 / x.p() + 1.0 / q <= 1.0)
    throw RegimeError("translate: Young condition 1/p + 1/q > 1 violated");
  std::vector<Tensor2> steps = x.steps();
  for (int k = 0; k < x.grid().steps(); ++k) {
    Tensor2& s = steps[static_cast<size_t>(k)];
    const Vec dh = h.increment(k, k + 1);
    const Vec dx = s.level1;
    // One-term trapezoid cross terms, exact for piecewise-linear segments:
    // int h (x) dx = int x (x) dh = 1/2 dh (x) dx etc.
    s.level2 += 0.5 * (outer(dh, dx) + outer(dx, dh) + outer(dh, dh));
    s.level1 = dx + dh;
  }
  return RoughPath(x.grid(), x.start() + h.values.front(), std::move(steps), x.p(), x.control());
}

double chen_defect(const RoughPath& x, int n_triples) {
  const int n = x.grid().size();
  if (n < 3) return 0.0;
  CounterRng rng(0x63686564ULL, 1);
  double worst = 0;
  for (int k = 0; k < n_triples; ++k) {
    int i = static_cast<int>(rng.next_u64() % static_cast<unsigned>(n - 2));
    int j = i + 1 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(n - i - 1));
    int l = j + static_cast<int>(rng.next_u64() % static_cast<unsigned>(n - j));
    const Tensor2 lhs = x.increment(i, l);
    const Tensor2 rhs = tensor_mul(x.increment(i, j), x.increment(j, l));
    worst = std::max(worst, std::max(norm_inf(lhs.level1 - rhs.level1),
                                     max_abs(lhs.level2 - rhs.level2)));
  }
  return worst;
}

}  // namespace rp
