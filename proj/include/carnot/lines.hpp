#pragma once

// Horizontal lines t -> g e^{tv}, horizontal segments, and point-to-line
// distances under a homogeneous metric.

#include "carnot/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace carnot {

class HorizontalLine {
 public:
  HorizontalLine() = default;

  /// `direction` must already be a unit vector of the first layer.
  HorizontalLine(GroupElement base, std::vector<double> direction)
      : base_(std::move(base)), direction_(std::move(direction)) {
    if (static_cast<int>(direction_.size()) != base_.algebra()->layer_size(1)) {
      throw InvalidArgument("line direction must have first-layer dimension");
    }
    if (std::abs(euclidean_norm(direction_) - 1.0) > 1e-12) {
      throw InvalidArgument("line direction must be a unit vector");
    }
  }

  /// Normalizes `direction`; throws if it vanishes.
  static HorizontalLine through(GroupElement base, std::vector<double> direction) {
    const double len = euclidean_norm(direction);
    if (!(len > 0.0) || !std::isfinite(len)) throw InvalidArgument("line direction must be nonzero");
    for (double& x : direction) x /= len;
    const double again = euclidean_norm(direction);
    if (std::abs(again - 1.0) > 1e-12) {
      for (double& x : direction) x /= again;
    }
    return HorizontalLine(std::move(base), std::move(direction));
  }

  const GroupElement& base() const { return base_; }
  const std::vector<double>& direction() const { return direction_; }
  const AlgebraPtr& algebra() const { return base_.algebra(); }

 private:
  GroupElement base_;
  std::vector<double> direction_;
};

/// base * (t v, 0, ..., 0).
inline GroupElement line_point(const HorizontalLine& line, double t) {
  std::vector<double> tv(line.direction());
  for (double& x : tv) x *= t;
  return line.base() * GroupElement::horizontal(line.algebra(), tv);
}

/// g * delta_t(horiz(g^{-1} h)), t in [0, 1].
inline GroupElement segment_point(const GroupElement& g, const GroupElement& h, double t) {
  require_same_group(g, h);
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("segment parameter must lie in [0, 1]");
  if (t == 0.0) return g;
  const int n1 = g.algebra()->layer_size(1);
  std::vector<double> step(static_cast<std::size_t>(n1));
  for (int j = 0; j < n1; ++j) step[static_cast<std::size_t>(j)] = t * (h[j] - g[j]);
  return g * GroupElement::horizontal(g.algebra(), step);
}

/// The line through pi_i(base) with the same direction.
inline HorizontalLine project_line(int i, const HorizontalLine& line) {
  return HorizontalLine(project(i, line.base()), line.direction());
}

struct LineSearchOptions {
  int grid_nodes = 64;
  double tolerance = 1e-10;
  int max_doublings = 8;
};

struct LineDistance {
  double distance = 0.0;
  double t = 0.0;
};

namespace detail {

/// Evaluates t -> N(q e^{tv}) in the algebra `alg` without allocating per call.
class LineGauge {
 public:
  LineGauge(const HomogeneousMetric& metric, const StratifiedAlgebra& alg, const double* q,
            const std::vector<double>& v)
      : metric_(metric), alg_(alg), q_(q), v_(v), step_(static_cast<std::size_t>(alg.dim()), 0.0),
        out_(static_cast<std::size_t>(alg.dim())) {}

  double operator()(double t) {
    for (std::size_t j = 0; j < v_.size(); ++j) step_[j] = t * v_[j];
    bch(alg_, q_, step_.data(), out_.data());
    return metric_.norm_coords(alg_, out_.data());
  }

 private:
  const HomogeneousMetric& metric_;
  const StratifiedAlgebra& alg_;
  const double* q_;
  const std::vector<double>& v_;
  Coords step_, out_;
};

/// Global-then-local minimization of f over [lo, hi] starting from t0, where
/// f(t) >= speed |t - t0| - f(t0) makes |t - t0| <= 2 f(t0) / speed a valid
/// bracket. Returns early with any value <= cutoff.
template <class F>
LineDistance minimize_on_line(F&& f, double t0, double speed, double lo, double hi,
                              const LineSearchOptions& opt,
                              double cutoff = -std::numeric_limits<double>::infinity()) {
  t0 = std::clamp(t0, lo, hi);
  LineDistance best{f(t0), t0};
  if (best.distance == 0.0 || best.distance <= cutoff) return best;
  double radius = 2.0 * best.distance / speed;

  const int nodes = std::max(opt.grid_nodes, 3);
  double a = 0.0, b = 0.0, spacing = 0.0;
  int arg = 0;
  for (int attempt = 0; attempt <= opt.max_doublings; ++attempt) {
    a = std::max(lo, t0 - radius);
    b = std::min(hi, t0 + radius);
    spacing = (b - a) / (nodes - 1);
    arg = -1;
    double argval = std::numeric_limits<double>::infinity();
    // nodes visited outward from t0 so a cutoff hit comes early
    const int mid = spacing > 0.0 ? static_cast<int>(std::lround((t0 - a) / spacing)) : 0;
    for (int step = 0; step < 2 * nodes; ++step) {
      const int k = mid + (step % 2 == 0 ? step / 2 : -(step + 1) / 2);
      if (k < 0 || k >= nodes) continue;
      const double t = k == nodes - 1 ? b : a + k * spacing;
      const double v = f(t);
      if (v <= cutoff) return {v, t};
      if (v < argval || (v == argval && k < arg)) {
        argval = v;
        arg = k;
      }
    }
    if (argval < best.distance) best = {argval, arg == nodes - 1 ? b : a + arg * spacing};
    const bool at_edge = (arg == 0 && a > lo) || (arg == nodes - 1 && b < hi);
    if (!at_edge) break;
    radius *= 2.0;
  }
  if (spacing == 0.0) return best;

  // golden-section refinement around the best grid node
  double x0 = std::max(a, best.t - spacing), x3 = std::min(b, best.t + spacing);
  constexpr double invphi = 0.6180339887498949;
  double x1 = x3 - invphi * (x3 - x0), x2 = x0 + invphi * (x3 - x0);
  double f1 = f(x1), f2 = f(x2);
  const double tol = opt.tolerance * std::max(1.0, std::abs(best.t));
  while (x3 - x0 > tol) {
    if (f1 <= f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x3 - invphi * (x3 - x0);
      f1 = f(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + invphi * (x3 - x0);
      f2 = f(x2);
    }
  }
  if (f1 < best.distance) best = {f1, x1};
  if (f2 < best.distance) best = {f2, x2};
  return best;
}

inline LineDistance dist_to_line_in(const HomogeneousMetric& metric, const StratifiedAlgebra& alg,
                                    const double* p, const double* base, const std::vector<double>& v,
                                    double lo, double hi, const LineSearchOptions& opt) {
  const auto n = static_cast<std::size_t>(alg.dim());
  Coords neg(n), q(n);
  for (std::size_t j = 0; j < n; ++j) neg[j] = -p[j];
  bch(alg, neg.data(), base, q.data());

  // Euclidean projection of the first layer: q_1 + t v closest to 0
  double t0 = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) t0 -= q[j] * v[j];

  Coords unit(n, 0.0);
  std::copy(v.begin(), v.end(), unit.begin());
  const double speed = metric.norm_coords(alg, unit.data());

  LineGauge f(metric, alg, q.data(), v);
  LineDistance best = minimize_on_line(f, t0, speed, lo, hi, opt);
  if (0.0 >= lo && 0.0 <= hi && best.t != 0.0) {
    const double at_base = f(0.0);
    if (at_base < best.distance) best = {at_base, 0.0};
  }
  return best;
}

}  // namespace detail

/// inf_t d(p, line_point(L, t)) and a minimizing t.
inline LineDistance dist_to_line(const HomogeneousMetric& metric, const GroupElement& p, const HorizontalLine& line,
                                 const LineSearchOptions& opt = {}) {
  require_same_group(p, line.base());
  const double inf = std::numeric_limits<double>::infinity();
  return detail::dist_to_line_in(metric, *p.algebra(), p.coords().data(), line.base().coords().data(),
                                 line.direction(), -inf, inf, opt);
}

/// Same, restricted to t in [t_lo, t_hi].
inline LineDistance dist_to_segment(const HomogeneousMetric& metric, const GroupElement& p,
                                    const HorizontalLine& line, double t_lo, double t_hi,
                                    const LineSearchOptions& opt = {}) {
  require_same_group(p, line.base());
  if (!(t_lo <= t_hi)) throw InvalidArgument("segment bounds out of order");
  return detail::dist_to_line_in(metric, *p.algebra(), p.coords().data(), line.base().coords().data(),
                                 line.direction(), t_lo, t_hi, opt);
}

/// d(pi_i(p), pi_i(L)), evaluated in the quotient.
inline LineDistance dist_to_line(const HomogeneousMetric& metric, int i, const GroupElement& p,
                                 const HorizontalLine& line, const LineSearchOptions& opt = {}) {
  require_same_group(p, line.base());
  const auto q = p.algebra()->quotient(i);
  const double inf = std::numeric_limits<double>::infinity();
  return detail::dist_to_line_in(metric, *q, p.coords().data(), line.base().coords().data(), line.direction(),
                                 -inf, inf, opt);
}

}  // namespace carnot
