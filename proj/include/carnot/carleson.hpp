#pragma once

// Separated nets, multiresolution ball families, the discrete Carleson sum
// sum_B beta_hat(B)^{2s} diam(B), gamma_hat, and synthetic curves.

#include "carnot/beta.hpp"
#include "carnot/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace carnot {

struct Net {
  int level = 0;
  double separation = 1.0;
  /// Indices into the input set, in acceptance order.
  std::vector<std::size_t> centers;
};

/// Greedy maximal 2^{-n}-separated net, scanning E in input order or in
/// `order` when given.
inline Net build_net(const HomogeneousMetric& metric, const std::vector<GroupElement>& E, int level,
                     const std::vector<std::size_t>* order = nullptr) {
  if (E.empty()) throw InvalidArgument("net of an empty set");
  if (order && order->size() != E.size()) throw InvalidArgument("net order is not a permutation of the input");
  Net net;
  net.level = level;
  net.separation = std::ldexp(1.0, -level);
  for (std::size_t j = 0; j < E.size(); ++j) {
    const std::size_t k = order ? (*order)[j] : j;
    bool far = true;
    for (std::size_t c : net.centers) {
      if (distance(metric, E[c], E[k]) < net.separation) {
        far = false;
        break;
      }
    }
    if (far) net.centers.push_back(k);
  }
  return net;
}

struct Ball {
  std::size_t center = 0;
  double radius = 0.0;
  int level = 0;
};

/// B(y, 10 * 2^{-n}) for y in the level-n net, n in [n_min, n_max].
inline std::vector<Ball> ball_family(const HomogeneousMetric& metric, const std::vector<GroupElement>& E, int n_min,
                                     int n_max, const std::vector<std::size_t>* order = nullptr) {
  if (n_min > n_max) throw InvalidArgument("depth window is empty");
  std::vector<Ball> out;
  for (int n = n_min; n <= n_max; ++n) {
    for (std::size_t c : build_net(metric, E, n, order).centers) out.push_back({c, 10.0 * std::ldexp(1.0, -n), n});
  }
  return out;
}

inline double diameter(const HomogeneousMetric& metric, const std::vector<GroupElement>& E) {
  double d = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    for (std::size_t j = i + 1; j < E.size(); ++j) d = std::max(d, distance(metric, E[i], E[j]));
  }
  return d;
}

struct CarlesonConfig {
  BetaConfig beta = [] {
    BetaConfig b;
    b.restarts = 2;
    b.with_classical = false;
    b.simplex.max_evaluations = 200;
    b.polish_evaluations = 100;
    b.max_opt_points = 64;
    return b;
  }();
  unsigned threads = 1;
  /// Scan the nets in a seeded random order instead of input order.
  std::optional<std::uint64_t> net_shuffle_seed;
};

struct LevelSum {
  int level = 0;
  std::size_t balls = 0;
  double sum = 0.0;
};

struct CarlesonResult {
  std::vector<LevelSum> levels;
  double total = 0.0;
};

inline CarlesonResult carleson_sum(const HomogeneousMetric& metric, const std::vector<GroupElement>& E, int n_min,
                                   int n_max, const CarlesonConfig& cfg = {}) {
  if (n_min > n_max) throw InvalidArgument("depth window is empty");
  CarlesonResult res;
  if (E.empty()) return res;
  const int s = E.front().algebra()->step();
  std::vector<std::size_t> order;
  if (cfg.net_shuffle_seed) {
    order.resize(E.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Sampler rng(*cfg.net_shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng.engine());
  }
  const auto balls = ball_family(metric, E, n_min, n_max, order.empty() ? nullptr : &order);
  std::vector<double> terms(balls.size(), 0.0);
  parallel_for(balls.size(), cfg.threads, [&](std::size_t b) {
    const auto& ball = balls[b];
    const auto rep = beta_hat(metric, E, E[ball.center], ball.radius, cfg.beta);
    if (rep.in_ball >= 2) terms[b] = std::pow(rep.beta_hat, 2.0 * s) * 2.0 * ball.radius;
  });
  for (int n = n_min; n <= n_max; ++n) res.levels.push_back({n, 0, 0.0});
  for (std::size_t b = 0; b < balls.size(); ++b) {
    auto& lv = res.levels[static_cast<std::size_t>(balls[b].level - n_min)];
    ++lv.balls;
    lv.sum += terms[b];
  }
  for (const auto& lv : res.levels) res.total += lv.sum;
  return res;
}

/// diam(E) + the Carleson sum over levels [n_min, n_max].
inline double gamma_hat(const HomogeneousMetric& metric, const std::vector<GroupElement>& E, int n_min, int n_max,
                        const CarlesonConfig& cfg = {}) {
  if (E.empty()) throw InvalidArgument("gamma_hat of an empty set");
  return diameter(metric, E) + carleson_sum(metric, E, n_min, n_max, cfg).total;
}

// ---------------------------------------------------------------------------
// Synthetic curves

struct SegmentCurve {
  GroupElement from, to;
};

/// Horizontal lift of the circle of radius `radius` in the (X1, Y1) plane,
/// translated to start at 0: (R(cos t - 1), R sin t, R^2 (t - sin t) / 2).
struct CircleLiftCurve {
  AlgebraPtr group;
  double radius = 1.0;
};

/// Horizontal path through `corners` alternating corners between the
/// x-axis and height `amplitude`, over unit horizontal extent.
struct ZigzagCurve {
  AlgebraPtr group;
  int corners = 4;
  double amplitude = 0.25;
};

using CurveSpec = std::variant<SegmentCurve, CircleLiftCurve, ZigzagCurve>;

struct CurveSample {
  std::vector<GroupElement> points;
  std::string descriptor;
  double chain_length = 0.0;
};

inline double chain_length(const HomogeneousMetric& metric, const std::vector<GroupElement>& pts) {
  double len = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) len += distance(metric, pts[k - 1], pts[k]);
  return len;
}

/// max_k |layers >= 2 of p_k^{-1} p_{k+1}|.
inline double horizontality_residual(const std::vector<GroupElement>& pts) {
  double worst = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    auto d = inverse(pts[k - 1]) * pts[k];
    const int n1 = d.algebra()->layer_size(1);
    double sq = 0.0;
    for (int j = n1; j < d.dim(); ++j) sq += d[j] * d[j];
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

namespace detail {

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<GroupElement> segment_points(const SegmentCurve& c, int m) {
  require_same_group(c.from, c.to);
  auto diff = inverse(c.from) * c.to;
  const auto& alg = *diff.algebra();
  double scale = 1.0, upper = 0.0;
  for (int j = 0; j < diff.dim(); ++j) {
    scale = std::max(scale, std::abs(diff[j]));
    if (alg.layer_of(j) > 1) upper = std::max(upper, std::abs(diff[j]));
  }
  if (upper > 1e-12 * scale) throw InvalidArgument("segment endpoints are not joined by a horizontal line");
  std::vector<GroupElement> out;
  for (int k = 0; k < m; ++k) {
    if (k == m - 1) out.push_back(c.to);
    else out.push_back(segment_point(c.from, c.to, static_cast<double>(k) / (m - 1)));
  }
  return out;
}

inline std::vector<GroupElement> circle_points(const CircleLiftCurve& c, int m) {
  const auto& alg = c.group;
  if (!alg || alg->step() != 2 || alg->layer_size(2) != 1 || alg->layer_size(1) % 2 != 0 ||
      !alg->same_structure(*heisenberg(alg->layer_size(1) / 2))) {
    throw InvalidArgument("circle lift needs a Heisenberg group");
  }
  if (!(c.radius > 0.0)) throw InvalidArgument("circle radius must be positive");
  const int k = alg->layer_size(1) / 2;
  const double R = c.radius;
  std::vector<GroupElement> out;
  for (int i = 0; i < m; ++i) {
    const double th = 2.0 * std::numbers::pi * i / (m - 1);
    Coords x(static_cast<std::size_t>(alg->dim()), 0.0);
    x[0] = R * (std::cos(th) - 1.0);
    x[static_cast<std::size_t>(k)] = R * std::sin(th);
    x.back() = R * R * (th - std::sin(th)) / 2.0;
    out.emplace_back(alg, std::move(x));
  }
  return out;
}

inline std::vector<GroupElement> zigzag_points(const ZigzagCurve& c, int m) {
  const auto& alg = c.group;
  if (!alg || alg->layer_size(1) < 2) throw InvalidArgument("zigzag needs at least two horizontal directions");
  if (c.corners < 0) throw InvalidArgument("corner count must be nonnegative");
  const int segs = c.corners + 1;
  if (m < segs + 1) throw InvalidArgument("zigzag needs at least corners + 2 points");
  // planar vertices
  std::vector<std::pair<double, double>> v;
  for (int j = 0; j <= segs; ++j) v.emplace_back(static_cast<double>(j) / segs, j % 2 == 1 ? c.amplitude : 0.0);
  std::vector<double> len(static_cast<std::size_t>(segs));
  double total = 0.0;
  for (int j = 0; j < segs; ++j) {
    len[j] = std::hypot(v[j + 1].first - v[j].first, v[j + 1].second - v[j].second);
    total += len[j];
  }
  // interior points per segment by largest remainder
  const int extra = m - (segs + 1);
  std::vector<int> per(static_cast<std::size_t>(segs));
  std::vector<std::pair<double, int>> rem;
  int used = 0;
  for (int j = 0; j < segs; ++j) {
    const double share = extra * len[j] / total;
    per[j] = static_cast<int>(std::floor(share));
    used += per[j];
    rem.emplace_back(share - per[j], j);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; used < extra; ++i, ++used) ++per[rem[static_cast<std::size_t>(i)].second];

  std::vector<GroupElement> out{GroupElement::identity(alg)};
  const auto n1 = static_cast<std::size_t>(alg->layer_size(1));
  for (int j = 0; j < segs; ++j) {
    const GroupElement corner = out.back();
    std::vector<double> step(n1, 0.0);
    const int pieces = per[j] + 1;
    for (int p = 1; p <= pieces; ++p) {
      const double t = static_cast<double>(p) / pieces;
      step[0] = t * (v[j + 1].first - v[j].first);
      step[1] = t * (v[j + 1].second - v[j].second);
      out.push_back(corner * GroupElement::horizontal(alg, step));
    }
  }
  return out;
}

}  // namespace detail

inline CurveSample sample_curve(const CurveSpec& spec, int m, const HomogeneousMetric& metric) {
  if (m < 2) throw InvalidArgument("a curve sample needs at least two points");
  CurveSample out;
  if (const auto* seg = std::get_if<SegmentCurve>(&spec)) {
    out.points = detail::segment_points(*seg, m);
    out.descriptor = "segment";
  } else if (const auto* circ = std::get_if<CircleLiftCurve>(&spec)) {
    out.points = detail::circle_points(*circ, m);
    out.descriptor = "circle(radius=" + detail::fmt_num(circ->radius) + ")";
  } else {
    const auto& z = std::get<ZigzagCurve>(spec);
    out.points = detail::zigzag_points(z, m);
    out.descriptor = "zigzag(corners=" + std::to_string(z.corners) + ",amplitude=" + detail::fmt_num(z.amplitude) + ")";
  }
  out.chain_length = chain_length(metric, out.points);
  return out;
}

/// m samples of the unit segment along X_1 from the identity with i.i.d.
/// N(0, sigma^2) noise added to every first-layer coordinate.
inline std::vector<GroupElement> noisy_segment(const AlgebraPtr& alg, int m, double sigma, std::uint64_t seed) {
  if (m < 2) throw InvalidArgument("a curve sample needs at least two points");
  if (!(sigma >= 0.0)) throw InvalidArgument("noise level must be nonnegative");
  std::vector<double> e1(static_cast<std::size_t>(alg->layer_size(1)), 0.0);
  e1[0] = 1.0;
  auto pts = detail::segment_points({GroupElement::identity(alg), GroupElement::horizontal(alg, e1)}, m);
  Sampler rng(seed);
  for (auto& p : pts) {
    Coords c = p.coords();
    for (int j = 0; j < alg->layer_size(1); ++j) c[static_cast<std::size_t>(j)] += rng.normal(0.0, sigma);
    p = GroupElement(alg, std::move(c));
  }
  return pts;
}

}  // namespace carnot
