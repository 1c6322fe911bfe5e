#pragma once

// Randomized checks of the quantitative lemmas. Each check samples
// configurations satisfying a lemma's hypotheses, evaluates
// LHS / (RHS without its constant), and summarizes the ratios; the fitted
// constant is the largest observed ratio.

#include "carnot/beta.hpp"
#include "carnot/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

struct InequalityReport {
  std::string lemma;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double max = 0.0;
  double p99 = 0.0;
  double p999 = 0.0;
  double fitted_constant = 0.0;
  double reference_constant = std::numeric_limits<double>::infinity();
  /// Ratios above the reference constant.
  std::size_t violations = 0;
  /// Failures of an inequality that holds without any constant.
  std::size_t hard_violations = 0;
  std::size_t degenerate = 0;
  std::string degenerate_reason;
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& key) const {
    for (const auto& [k, v] : extras) {
      if (k == key) return v;
    }
    throw InvalidArgument("report has no field " + key);
  }
};

struct VerifyOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double reference = std::numeric_limits<double>::infinity();
  unsigned threads = 1;
  /// Intervals of the t-grid used for sups over segments.
  int grid_intervals = 128;
  LineSearchOptions line{16, 1e-10, 8};
  /// Proposal budget per sample for rejection sampling.
  std::size_t max_attempts = 1000000;
};

namespace detail {

struct SampleOutcome {
  double ratio = 0.0;
  bool degenerate = false;
  bool hard_violation = false;
  std::array<double, 3> aux{};
};

template <class Body>
std::vector<SampleOutcome> run_samples(const VerifyOptions& opt, Body&& body) {
  std::vector<SampleOutcome> out(opt.samples);
  parallel_for(opt.samples, opt.threads, [&](std::size_t i) {
    Sampler rng(opt.seed, i);
    out[i] = body(rng, i);
  });
  return out;
}

inline double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::min(sorted.size(), std::max<std::size_t>(k, 1)) - 1];
}

inline InequalityReport summarize(std::string lemma, const VerifyOptions& opt, const std::vector<SampleOutcome>& res,
                                  std::string degenerate_reason) {
  InequalityReport rep;
  rep.lemma = std::move(lemma);
  rep.samples = opt.samples;
  rep.seed = opt.seed;
  rep.reference_constant = opt.reference;
  rep.degenerate_reason = std::move(degenerate_reason);
  std::vector<double> ratios;
  for (const auto& r : res) {
    if (r.hard_violation) ++rep.hard_violations;
    if (r.degenerate) {
      ++rep.degenerate;
      continue;
    }
    ratios.push_back(r.ratio);
    if (r.ratio > opt.reference * (1.0 + 1e-12)) ++rep.violations;
  }
  std::sort(ratios.begin(), ratios.end());
  if (!ratios.empty()) rep.max = ratios.back();
  rep.p99 = nearest_rank(ratios, 0.99);
  rep.p999 = nearest_rank(ratios, 0.999);
  rep.fitted_constant = rep.max;
  return rep;
}

inline void require_unit_interval(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw InvalidArgument(std::string(what) + " must lie in (0, 1)");
}

inline void require_hebisch_sikora(const HomogeneousMetric& m) {
  if (m.kind() != HomogeneousMetric::Kind::HebischSikora) {
    throw InvalidArgument("this check is stated for a Hebisch-Sikora metric");
  }
}

/// Uniform in the Euclidean ball of radius r in R^d, or on its sphere.
inline std::vector<double> ball_or_sphere(Sampler& rng, int d, double r, bool sphere) {
  if (!sphere) return rng.ball_point(d, r);
  auto v = rng.unit_vector(d);
  for (double& x : v) x *= r;
  return v;
}

inline GroupElement euclidean_element(Sampler& rng, const AlgebraPtr& alg, double r, bool sphere = false) {
  auto c = ball_or_sphere(rng, alg->dim(), r, sphere);
  return GroupElement(alg, Coords(c.begin(), c.end()));
}

/// Each layer uniform in its own ball (or sphere) of radius r.
inline GroupElement layered_element(Sampler& rng, const AlgebraPtr& alg, double r, bool sphere) {
  Coords c(static_cast<std::size_t>(alg->dim()), 0.0);
  for (int i = 1; i <= alg->step(); ++i) {
    auto b = ball_or_sphere(rng, alg->layer_size(i), r, sphere);
    std::copy(b.begin(), b.end(), c.begin() + alg->layer_offset(i));
  }
  return GroupElement(alg, std::move(c));
}

/// N(pi_i(g)) from the coordinate prefix of g.
inline double quotient_norm(const HomogeneousMetric& m, const GroupElement& g, int i) {
  return m.norm_coords(*g.algebra()->quotient(i), g.coords().data());
}

inline double quotient_distance(const HomogeneousMetric& m, const GroupElement& a, const GroupElement& b, int i) {
  return quotient_norm(m, inverse(a) * b, i);
}

/// Unit-speed horizontal displacement: the metric length of e^{v}, |v| = 1.
inline double horizontal_speed(const HomogeneousMetric& m, const AlgebraPtr& alg, const std::vector<double>& v) {
  return norm(m, GroupElement::horizontal(alg, v));
}

/// inf_{s in [0,1]} d(pi_i(x), pi_i(L_{g,h}(s))) where L_{g,h}(s) = g delta_s(horiz(g^{-1} h)).
inline double point_to_segment(const HomogeneousMetric& m, int i, const GroupElement& x, const GroupElement& g,
                               const GroupElement& h, const LineSearchOptions& opt) {
  const int n1 = g.algebra()->layer_size(1);
  std::vector<double> dir(static_cast<std::size_t>(n1));
  for (int j = 0; j < n1; ++j) dir[static_cast<std::size_t>(j)] = h[j] - g[j];
  const double len = euclidean_norm(dir);
  if (len == 0.0) return quotient_distance(m, g, x, i);
  for (double& c : dir) c /= len;
  const auto q = g.algebra()->quotient(i);
  return dist_to_line_in(m, *q, x.coords().data(), g.coords().data(), dir, 0.0, len, opt).distance;
}

/// max over the t-grid of d(pi_i(L_{a,b}(t)), pi_i(segment g h)).
inline double sup_over_segment(const HomogeneousMetric& m, int i, const GroupElement& a, const GroupElement& b,
                               const GroupElement& g, const GroupElement& h, int intervals,
                               const LineSearchOptions& opt) {
  double worst = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double t = static_cast<double>(k) / intervals;
    worst = std::max(worst, point_to_segment(m, i, segment_point(a, b, t), g, h, opt));
  }
  return worst;
}

/// A random horizontal line through a point of the unit box.
inline HorizontalLine random_line(Sampler& rng, const AlgebraPtr& alg) {
  auto base = rng.box_element(alg, 1.0);
  return HorizontalLine(std::move(base), rng.unit_vector(alg->layer_size(1)));
}

inline double log_uniform(Sampler& rng, double lo_exp10, double hi_exp10) {
  return std::pow(10.0, rng.uniform(lo_exp10, hi_exp10));
}

inline bool pairwise_within(const HomogeneousMetric& m, const std::vector<GroupElement>& pts, double lo, double hi) {
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double d = distance(m, pts[a], pts[b]);
      if (d < lo || d > hi) return false;
    }
  }
  return true;
}

inline void count_attempt(std::size_t& attempts, const VerifyOptions& opt) {
  if (++attempts > opt.max_attempts) {
    throw NumericalFailure("rejection sampling exhausted its proposal budget; parameters look infeasible");
  }
}

/// Points near a horizontal line at metric positions ell * frac[j] along it,
/// each perturbed by delta_ell of a Euclidean vector of length <= eps.
inline std::vector<GroupElement> near_line_points(Sampler& rng, const HomogeneousMetric& m, const HorizontalLine& L,
                                                  double ell, const std::vector<double>& frac, double eps) {
  const auto& alg = L.algebra();
  const double speed = horizontal_speed(m, alg, L.direction());
  std::vector<GroupElement> out;
  for (double f : frac) {
    out.push_back(line_point(L, f * ell / speed) * dilate(ell, euclidean_element(rng, alg, eps)));
  }
  return out;
}

}  // namespace detail

/// |P_k(x, y)| / eta for |x_i| <= 1, |y_i| <= eta; ratio is the max over k.
inline InequalityReport check_bch_bound(const AlgebraPtr& alg, double eta, const VerifyOptions& opt = {}) {
  detail::require_unit_interval(eta, "eta");
  const int s = alg->step();
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    const auto x = detail::layered_element(rng, alg, 1.0, rng.uniform() < 0.5);
    const auto y = detail::layered_element(rng, alg, eta, rng.uniform() < 0.5);
    detail::SampleOutcome o;
    for (int k = 2; k <= s; ++k) o.ratio = std::max(o.ratio, euclidean_norm(bch_polynomial(k, x, y)) / eta);
    return o;
  });
  return detail::summarize("bch-bound", opt, res, "");
}

/// sup_{i, t in [0, ell]} d(pi_i(g e^{ut}), pi_i(h e^{vt}))^i / (eta ell^i)
/// with g in h delta_ell(B(eta)), |u - v| <= eta, u, v in the unit ball.
inline InequalityReport check_close_lines(const HomogeneousMetric& metric, const AlgebraPtr& alg, double eta,
                                          double ell, const VerifyOptions& opt = {}) {
  detail::require_unit_interval(eta, "eta");
  if (!(ell > 0.0)) throw InvalidArgument("ell must be positive");
  const int s = alg->step(), n1 = alg->layer_size(1);
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    const auto h = rng.box_element(alg, 1.0);
    const auto g = h * dilate(ell, detail::euclidean_element(rng, alg, eta, rng.uniform() < 0.5));
    const auto u = rng.ball_point(n1, 1.0);
    std::vector<double> v;
    std::size_t attempts = 0;
    do {
      detail::count_attempt(attempts, opt);
      auto w = detail::ball_or_sphere(rng, n1, eta, rng.uniform() < 0.5);
      v = u;
      for (int j = 0; j < n1; ++j) v[static_cast<std::size_t>(j)] += w[static_cast<std::size_t>(j)];
    } while (euclidean_norm(v) > 1.0);

    detail::SampleOutcome o;
    std::vector<double> ut(u.size()), vt(v.size());
    for (int k = 0; k <= opt.grid_intervals; ++k) {
      const double t = ell * k / opt.grid_intervals;
      for (int j = 0; j < n1; ++j) {
        ut[static_cast<std::size_t>(j)] = t * u[static_cast<std::size_t>(j)];
        vt[static_cast<std::size_t>(j)] = t * v[static_cast<std::size_t>(j)];
      }
      const auto diff = inverse(g * GroupElement::horizontal(alg, ut)) * (h * GroupElement::horizontal(alg, vt));
      for (int i = 1; i <= s; ++i) {
        const double d = detail::quotient_norm(metric, diff, i);
        o.ratio = std::max(o.ratio, std::pow(d / ell, i) / eta);
      }
    }
    return o;
  });
  return detail::summarize("close-lines", opt, res, "");
}

/// rho / eta where rho = |delta_{1/ell}(q^{-1} p)| and
/// eta = max_i (d(pi_i p, pi_i q) / ell)^i < 1.
inline InequalityReport check_beta_balls(const HomogeneousMetric& metric, const AlgebraPtr& alg,
                                         const VerifyOptions& opt = {}) {
  const int s = alg->step();
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    detail::SampleOutcome o;
    std::size_t attempts = 0;
    while (true) {
      detail::count_attempt(attempts, opt);
      const auto q = rng.box_element(alg, 1.0);
      const double ell = std::exp2(rng.uniform(-2.0, 2.0));
      const double scale = detail::log_uniform(rng, -4.0, -0.3);
      const auto w = detail::layered_element(rng, alg, scale, rng.uniform() < 0.5);
      const auto p = q * dilate(ell, w);
      double eta = 0.0;
      for (int i = 1; i <= s; ++i) eta = std::max(eta, std::pow(detail::quotient_distance(metric, p, q, i) / ell, i));
      if (!(eta < 1.0)) continue;
      if (eta == 0.0) {
        o.degenerate = true;
        return o;
      }
      const auto w_back = dilate(1.0 / ell, inverse(q) * p);
      o.ratio = euclidean_norm({w_back.coords().data(), w_back.coords().size()}) / eta;
      return o;
    }
  });
  return detail::summarize("beta-balls", opt, res, "p = q");
}

/// rho / eta^{1/2} where rho = inf_s |delta_{1/ell}(e^{-sv} b^{-1} p)| for
/// L = b e^{sv}, and eta = max_i (d(pi_i p, pi_i L) / ell)^{2i} < eta0.
inline InequalityReport check_euc_ball(const HomogeneousMetric& metric, const AlgebraPtr& alg, double eta0,
                                       const VerifyOptions& opt = {}) {
  detail::require_unit_interval(eta0, "eta0");
  const int s = alg->step(), n1 = alg->layer_size(1);
  const double inf = std::numeric_limits<double>::infinity();
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    detail::SampleOutcome o;
    std::size_t attempts = 0;
    while (true) {
      detail::count_attempt(attempts, opt);
      const auto L = detail::random_line(rng, alg);
      const double ell = std::exp2(rng.uniform(-2.0, 2.0));
      const double scale = detail::log_uniform(rng, -5.0, -0.5);
      const auto p = line_point(L, ell * rng.uniform(-1.0, 1.0)) *
                     dilate(ell, detail::layered_element(rng, alg, scale, rng.uniform() < 0.5));
      double eta = 0.0;
      for (int i = 1; i <= s; ++i) {
        eta = std::max(eta, std::pow(dist_to_line(metric, i, p, L, opt.line).distance / ell, 2 * i));
      }
      if (!(eta < eta0)) continue;
      if (eta == 0.0) {
        o.degenerate = true;
        return o;
      }
      const auto q = inverse(L.base()) * p;
      double t0 = 0.0;
      for (int j = 0; j < n1; ++j) t0 += q[j] * L.direction()[static_cast<std::size_t>(j)];
      auto f = [&](double t) {
        std::vector<double> back(L.direction());
        for (double& c : back) c *= -t;
        const auto z = dilate(1.0 / ell, GroupElement::horizontal(alg, back) * q);
        return euclidean_norm({z.coords().data(), z.coords().size()});
      };
      const double rho = detail::minimize_on_line(f, t0, 1.0 / ell, -inf, inf, LineSearchOptions{}).distance;
      o.ratio = rho / std::sqrt(eta);
      return o;
    }
  });
  return detail::summarize("euc-ball", opt, res, "p on L");
}

/// N(g) / (N(pi_1 g) + NH(g)).
inline InequalityReport check_pi_nh(const HomogeneousMetric& metric, const AlgebraPtr& alg,
                                    const VerifyOptions& opt = {}) {
  const int s = alg->step();
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    Coords c(static_cast<std::size_t>(alg->dim()), 0.0);
    for (int i = 1; i <= s; ++i) {
      auto b = rng.ball_point(alg->layer_size(i), detail::log_uniform(rng, -3.0, 1.0));
      std::copy(b.begin(), b.end(), c.begin() + alg->layer_offset(i));
    }
    const GroupElement g(alg, std::move(c));
    detail::SampleOutcome o;
    const double den = detail::quotient_norm(metric, g, 1) + nh(metric, g);
    if (!(den > 0.0)) {
      o.degenerate = true;
      return o;
    }
    o.ratio = norm(metric, g) / den;
    return o;
  });
  return detail::summarize("pi-nh", opt, res, "g = 0");
}

/// [NH(a^{-1} b)^s / d(a, b)^{s-1}] / max{d(a, L), d(b, L)}.
inline InequalityReport check_nonhorizontal(const HomogeneousMetric& metric, const AlgebraPtr& alg,
                                            const VerifyOptions& opt = {}) {
  const int s = alg->step();
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    const auto L = detail::random_line(rng, alg);
    auto near = [&] {
      const double eps = detail::log_uniform(rng, -4.0, 0.0);
      return line_point(L, rng.uniform(-1.0, 1.0)) * dilate(eps, detail::euclidean_element(rng, alg, 1.0));
    };
    const auto a = near();
    const auto b = near();
    detail::SampleOutcome o;
    const double dab = distance(metric, a, b);
    const double den = std::max(dist_to_line(metric, a, L, opt.line).distance,
                                dist_to_line(metric, b, L, opt.line).distance);
    if (!(dab > 0.0) || !(den > 0.0)) {
      o.degenerate = true;
      return o;
    }
    o.ratio = std::pow(nh(metric, inverse(a) * b), s) / std::pow(dab, s - 1) / den;
    return o;
  });
  return detail::summarize("nonhorizontal", opt, res, "a = b or both points on L");
}

namespace detail {

/// Tuples with all pairwise distances in [lambda ell, ell], mixing uniform
/// proposals in the ball B(c, ell) with ordered proposals near a line.
inline std::vector<GroupElement> separated_tuple(Sampler& rng, const HomogeneousMetric& m, const AlgebraPtr& alg,
                                                 int arity, double lambda, double& ell, const VerifyOptions& opt) {
  std::size_t attempts = 0;
  while (true) {
    ell = std::exp2(rng.uniform(-1.0, 1.0));
    if (rng.uniform() < 0.5) {
      const auto c = rng.box_element(alg, 1.0);
      std::vector<GroupElement> pts;
      while (static_cast<int>(pts.size()) < arity) {
        count_attempt(attempts, opt);
        // the Hebisch-Sikora unit ball is the Euclidean ball of radius eta
        auto p = c * dilate(ell, euclidean_element(rng, alg, m.eta()));
        bool ok = true;
        for (const auto& q : pts) {
          const double d = distance(m, p, q);
          if (d < lambda * ell || d > ell) {
            ok = false;
            break;
          }
        }
        if (ok) pts.push_back(std::move(p));
      }
      return pts;
    }
    count_attempt(attempts, opt);
    const auto L = random_line(rng, alg);
    std::vector<double> frac;
    for (int j = 0; j < arity; ++j) {
      const double jitter = (j > 0 && j < arity - 1) ? rng.uniform(-0.15, 0.15) : 0.0;
      frac.push_back(0.95 * (j + jitter) / (arity - 1));
    }
    auto pts = near_line_points(rng, m, L, ell, frac, log_uniform(rng, -4.0, -1.0));
    if (pairwise_within(m, pts, lambda * ell, ell)) return pts;
  }
}

}  // namespace detail

/// Triangle-excess curvature bounds for tuples of 3, 4 or 5 points with
/// pairwise distances in [lambda ell, ell]; ratio = LHS / excess.
inline InequalityReport check_curvature(const HomogeneousMetric& metric, const AlgebraPtr& alg, double lambda_sep,
                                        int arity, const VerifyOptions& opt = {}) {
  detail::require_hebisch_sikora(metric);
  detail::require_unit_interval(lambda_sep, "lambda");
  if (arity < 3 || arity > 5) throw InvalidArgument("curvature arity must be 3, 4 or 5");
  const int s = alg->step(), n1 = alg->layer_size(1);
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    double ell = 1.0;
    const auto p = detail::separated_tuple(rng, metric, alg, arity, lambda_sep, ell, opt);
    double excess = -distance(metric, p.front(), p.back());
    for (int k = 1; k < arity; ++k) excess += distance(metric, p[static_cast<std::size_t>(k - 1)], p[static_cast<std::size_t>(k)]);

    detail::SampleOutcome o;
    o.hard_violation = excess < -1e-12 * ell;
    if (excess < 1e-12) {
      o.degenerate = true;
      return o;
    }
    auto scaled = [&](double d, int i) { return std::pow(d, 2 * i) / std::pow(ell, 2 * i - 1); };
    double lhs = 0.0;
    if (arity == 3) {
      const auto a12 = inverse(p[0]) * p[1], a13 = inverse(p[0]) * p[2];
      // first-layer distance from pi_1(a12) to the segment [0, pi_1(a13)]
      std::vector<double> x(static_cast<std::size_t>(n1)), y(static_cast<std::size_t>(n1));
      double yy = 0.0, xy = 0.0;
      for (int j = 0; j < n1; ++j) {
        x[static_cast<std::size_t>(j)] = a12[j];
        y[static_cast<std::size_t>(j)] = a13[j];
        yy += a13[j] * a13[j];
        xy += a12[j] * a13[j];
      }
      const double t = yy > 0.0 ? std::clamp(xy / yy, 0.0, 1.0) : 0.0;
      Coords gap(static_cast<std::size_t>(n1));
      for (std::size_t j = 0; j < gap.size(); ++j) gap[j] = x[j] - t * y[j];
      const double first = metric.norm_coords(*alg->quotient(1), gap.data());
      double layered = 0.0;
      for (int i = 2; i <= s; ++i) layered = std::max(layered, scaled(nh(metric, project(i, a13)), i));
      lhs = first * first / ell + layered;
    } else if (arity == 4) {
      for (int i = 1; i <= s; ++i) {
        lhs += scaled(detail::sup_over_segment(metric, i, p[0], p[2], p[0], p[3], opt.grid_intervals, opt.line), i);
        lhs += scaled(detail::sup_over_segment(metric, i, p[2], p[3], p[0], p[3], opt.grid_intervals, opt.line), i);
      }
    } else {
      for (int i = 1; i <= s; ++i) {
        lhs += scaled(detail::sup_over_segment(metric, i, p[2], p[3], p[0], p[4], opt.grid_intervals, opt.line), i);
      }
    }
    o.ratio = lhs / excess;
    o.aux = {lhs, excess, ell};
    return o;
  });
  return detail::summarize("curvature-" + std::to_string(arity), opt, res, "triangle excess below 1e-12");
}

/// (N(x, y) - N(x, 0)) / |y|^2 for N(x, 0) in (alpha, 1) and top-layer y
/// with |y| <= y_max N(x, 0)^s. The lower bound N(x, y) >= N(x, 0) is counted as a hard violation, and
/// the gap at y / 2 is compared with the gap at y for the quadratic order.
inline InequalityReport check_hs_taylor(const HomogeneousMetric& metric, const AlgebraPtr& alg, double alpha,
                                        double y_max = 0.05, const VerifyOptions& opt = {}) {
  detail::require_hebisch_sikora(metric);
  detail::require_unit_interval(alpha, "alpha");
  const int s = alg->step();
  if (s < 2) throw InvalidArgument("the Taylor check needs a group of step at least 2");
  if (!(y_max > 0.0)) throw InvalidArgument("y_max must be positive");
  const int top = alg->layer_offset(s), ns = alg->layer_size(s);
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    Coords c(static_cast<std::size_t>(alg->dim()), 0.0);
    for (int i = 1; i < s; ++i) {
      auto b = rng.ball_point(alg->layer_size(i), 1.0);
      std::copy(b.begin(), b.end(), c.begin() + alg->layer_offset(i));
    }
    detail::SampleOutcome o;
    GroupElement x(alg, std::move(c));
    const double nx = norm(metric, x);
    if (!(nx > 0.0)) {
      o.degenerate = true;
      return o;
    }
    x = dilate(rng.uniform(alpha, 1.0) / nx, x);
    const double base = norm(metric, x);
    auto y = rng.unit_vector(ns);
    const double len = y_max * std::pow(base, s) * detail::log_uniform(rng, -3.0, 0.0);
    auto with_top = [&](double scale) {
      Coords z = x.coords();
      for (int j = 0; j < ns; ++j) z[static_cast<std::size_t>(top + j)] = scale * y[static_cast<std::size_t>(j)];
      return norm(metric, GroupElement(alg, std::move(z)));
    };
    const double gap = with_top(len) - base;
    const double half = with_top(0.5 * len) - base;
    o.hard_violation = gap < -4.0 * std::numeric_limits<double>::epsilon() * base;
    if (!(half > 0.0)) {
      o.degenerate = true;
      return o;
    }
    o.ratio = gap / (len * len);
    o.aux = {gap / half, 0.0, 0.0};
    return o;
  });
  auto rep = detail::summarize("hs-taylor", opt, res, "gap at y/2 not positive");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::size_t off = 0;
  for (const auto& r : res) {
    if (r.degenerate) continue;
    lo = std::min(lo, r.aux[0]);
    hi = std::max(hi, r.aux[0]);
    if (std::abs(r.aux[0] / 4.0 - 1.0) > 0.2) ++off;
  }
  rep.extras = {{"order_ratio_min", lo}, {"order_ratio_max", hi}, {"order_outside_20pct", static_cast<double>(off)}};
  return rep;
}

/// Excess d12 + d23 - d13 over max_{i,k} d(pi_k p_i, pi_k L)^{2k} / ell^{2k-1}
/// for p_1, p_2, p_3 ordered along a horizontal line L. The first
/// `corollary_samples` samples are also scored against beta_hat(B(p_1, ell))^{2s} ell.
inline InequalityReport check_sufficiency_triple(const HomogeneousMetric& metric, const AlgebraPtr& alg, double alpha,
                                                 std::size_t corollary_samples = 64,
                                                 const VerifyOptions& opt = {}) {
  detail::require_hebisch_sikora(metric);
  detail::require_unit_interval(alpha, "alpha");
  const int s = alg->step();
  BetaConfig bcfg;
  bcfg.restarts = 2;
  bcfg.with_classical = false;
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t index) {
    std::size_t attempts = 0;
    while (true) {
      detail::count_attempt(attempts, opt);
      const auto L = detail::random_line(rng, alg);
      const double ell = std::exp2(rng.uniform(-1.0, 1.0));
      const double span = rng.uniform(std::min(2.0 * alpha, 1.0), 1.0) * 0.97;
      const double margin = std::min(alpha, 0.5 * span);
      const double mid = rng.uniform(margin, span - margin);
      const double eps = detail::log_uniform(rng, -4.0, -0.5);
      const auto p = detail::near_line_points(rng, metric, L, ell, {0.0, mid, span}, eps);
      if (!detail::pairwise_within(metric, p, alpha * ell, ell)) continue;

      const double excess = distance(metric, p[0], p[1]) + distance(metric, p[1], p[2]) - distance(metric, p[0], p[2]);
      double den = 0.0;
      for (const auto& q : p) {
        for (int k = 1; k <= s; ++k) {
          const double d = dist_to_line(metric, k, q, L, opt.line).distance;
          den = std::max(den, std::pow(d, 2 * k) / std::pow(ell, 2 * k - 1));
        }
      }
      detail::SampleOutcome o;
      o.hard_violation = excess < -1e-12 * ell;
      if (!(den > 0.0)) {
        o.degenerate = true;
        return o;
      }
      o.ratio = excess / den;
      o.aux = {-1.0, 0.0, 0.0};
      if (index < corollary_samples) {
        const auto rep = beta_hat(metric, p, p[0], ell, bcfg);
        o.aux[0] = excess / (std::pow(rep.beta_hat, 2 * s) * ell);
      }
      return o;
    }
  });
  auto rep = detail::summarize("sufficiency-triple", opt, res, "all points on L");
  double cor_max = 0.0;
  std::size_t evaluated = 0, gaps = 0;
  for (const auto& r : res) {
    if (r.degenerate || r.aux[0] < 0.0) continue;
    ++evaluated;
    cor_max = std::max(cor_max, r.aux[0]);
    // the optimal line is at least as good as L, up to the sum-vs-max factor s
    if (r.aux[0] < r.ratio / s * (1.0 - 1e-9)) ++gaps;
  }
  rep.extras = {{"corollary_samples", static_cast<double>(evaluated)},
                {"corollary_fitted_constant", cor_max},
                {"corollary_optimizer_gaps", static_cast<double>(gaps)}};
  return rep;
}

/// |pi_1(p_1) - p_2'| / |pi_1(p_1) - pi_1(p_3)| for triples with pairwise
/// distances in [lambda ell, ell] and excess below mu ell; p_2' is the
/// projection of pi_1(p_2) on the line through pi_1(p_1), pi_1(p_3). The
/// ordering claim is ratio <= 1, so violations are counted against 1.
inline InequalityReport check_proj_order(const HomogeneousMetric& metric, const AlgebraPtr& alg, double lambda_sep,
                                         double mu, const VerifyOptions& opt = {}) {
  detail::require_hebisch_sikora(metric);
  detail::require_unit_interval(lambda_sep, "lambda");
  detail::require_unit_interval(mu, "mu");
  const int n1 = alg->layer_size(1);
  auto res = detail::run_samples(opt, [&](Sampler& rng, std::size_t) {
    std::size_t attempts = 0;
    while (true) {
      detail::count_attempt(attempts, opt);
      const auto L = detail::random_line(rng, alg);
      const double nominal = std::exp2(rng.uniform(-1.0, 1.0));
      const double mid = rng.uniform() < 0.5 ? 0.5 + rng.uniform(-1.0, 1.0) * std::max(0.5 - lambda_sep, 0.05)
                                             : rng.uniform(-0.25, 1.25);
      const auto p = detail::near_line_points(rng, metric, L, nominal, {0.0, mid, 1.0},
                                              detail::log_uniform(rng, -2.5, -0.5));
      const double d12 = distance(metric, p[0], p[1]), d23 = distance(metric, p[1], p[2]),
                   d13 = distance(metric, p[0], p[2]);
      const double ell = std::max({d12, d23, d13});
      if (std::min({d12, d23, d13}) < lambda_sep * ell || !(d12 + d23 - d13 < mu * ell)) continue;

      detail::SampleOutcome o;
      double dd = 0.0, proj = 0.0;
      for (int j = 0; j < n1; ++j) {
        const double dir = p[2][j] - p[0][j];
        dd += dir * dir;
        proj += (p[1][j] - p[0][j]) * dir;
      }
      if (!(dd > 1e-24 * ell * ell)) {
        o.degenerate = true;
        return o;
      }
      o.ratio = std::abs(proj) / dd;
      return o;
    }
  });
  VerifyOptions at_one = opt;
  at_one.reference = 1.0;
  auto rep = detail::summarize("proj-order", at_one, res, "pi_1(p_1) = pi_1(p_3)");
  const double valid = static_cast<double>(rep.samples - rep.degenerate);
  rep.extras = {{"violation_rate", valid > 0 ? static_cast<double>(rep.violations) / valid : 0.0}};
  return rep;
}

}  // namespace carnot
