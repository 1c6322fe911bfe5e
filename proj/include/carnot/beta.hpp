#pragma once

// Classical and stratified beta numbers of a finite set in a ball,
// minimized over horizontal lines.
//
// All work happens in the normalized frame y = delta_{1/r}(x^{-1} z), where
// the ball is B(0, 1); the objective is exactly invariant under this change,
// so the optimizer behaves identically on translated and dilated copies.

#include "carnot/lines.hpp"
#include "carnot/nelder_mead.hpp"
#include "carnot/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace carnot {

struct BetaConfig {
  int restarts = 8;
  std::uint64_t seed = 1;
  NelderMeadOptions simplex{300, 1e-14, 1e-9, 1e-7};
  /// Larger in-ball sets are optimized on a farthest-point subsample, then
  /// polished on the full set.
  int max_opt_points = 96;
  int polish_evaluations = 150;
  LineSearchOptions line;
  bool with_classical = true;
  /// Relative slack of the closed-ball membership test d(x, z) <= r.
  double ball_tolerance = 1e-12;
};

struct BetaObjective {
  double value = 0.0;
  /// sup_z d(pi_i z, pi_i L) / r for i = 1..s.
  std::vector<double> per_layer_sup;
};

struct BetaReport {
  std::vector<double> per_layer_sup;
  double beta_hat = 0.0;
  double beta_classical = 0.0;
  std::optional<HorizontalLine> best_line;
  std::optional<HorizontalLine> classical_line;
  std::size_t in_ball = 0;
  int starts_used = 0;
  int evaluations = 0;
  bool converged = true;
};

struct ClassicalBeta {
  double value = 0.0;
  std::optional<HorizontalLine> line;
};

namespace detail {

/// Points of E inside B(x, r), in the normalized frame.
inline std::vector<Coords> normalized_ball(const HomogeneousMetric& metric, const std::vector<GroupElement>& E,
                                           const GroupElement& x, double r, double tol) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ball radius must be positive");
  const auto& alg = *x.algebra();
  const auto n = static_cast<std::size_t>(alg.dim());
  Coords neg(n), y(n);
  for (std::size_t j = 0; j < n; ++j) neg[j] = -x[j];
  std::vector<Coords> out;
  for (const auto& z : E) {
    require_same_group(x, z);
    bch(alg, neg.data(), z.coords().data(), y.data());
    for (int i = 1; i <= alg.step(); ++i) {
      const double f = std::pow(r, -i);
      for (int j = alg.layer_offset(i); j < alg.layer_offset(i) + alg.layer_size(i); ++j) y[j] *= f;
    }
    if (metric.norm_coords(alg, y.data()) <= 1.0 + tol) out.push_back(y);
  }
  return out;
}

inline Coords normalize_element(const GroupElement& x, double r, const GroupElement& g) {
  auto y = dilate(1.0 / r, inverse(x) * g);
  return y.coords();
}

inline GroupElement denormalize(const AlgebraPtr& alg, const GroupElement& x, double r, const Coords& u) {
  return x * dilate(r, GroupElement(alg, u));
}

/// sup over a fixed normalized point set of the per-quotient distances to a
/// line, with one-evaluation upper bounds pruning the exact searches.
class BallProblem {
 public:
  BallProblem(const HomogeneousMetric& metric, AlgebraPtr alg, std::vector<Coords> pts, LineSearchOptions opt)
      : metric_(metric), alg_(std::move(alg)), pts_(std::move(pts)), opt_(opt) {
    for (int i = 1; i <= alg_->step(); ++i) quotients_.push_back(alg_->quotient(i));
    const auto n = static_cast<std::size_t>(alg_->dim());
    q_.assign(pts_.size(), Coords(n));
    t0_.resize(pts_.size());
    ub_.assign(static_cast<std::size_t>(alg_->step()), std::vector<double>(pts_.size()));
    order_.resize(pts_.size());
  }

  std::size_t size() const { return pts_.size(); }
  const std::vector<Coords>& points() const { return pts_; }

  /// Per-layer sups for the line through `base` with unit direction `v`;
  /// only layers >= first_layer are computed (the rest are left at 0).
  std::vector<double> sups(const double* base, const std::vector<double>& v, int first_layer = 1) {
    const int s = alg_->step();
    const auto n = static_cast<std::size_t>(alg_->dim());
    const auto n1 = v.size();
    Coords neg(n), hor(n, 0.0), w(n);
    for (std::size_t j = 0; j < n1; ++j) hor[j] = v[j];
    const double speed = metric_.norm_coords(*alg_, hor.data());

    for (std::size_t k = 0; k < pts_.size(); ++k) {
      for (std::size_t j = 0; j < n; ++j) neg[j] = -pts_[k][j];
      bch(*alg_, neg.data(), base, q_[k].data());
      double t0 = 0.0;
      for (std::size_t j = 0; j < n1; ++j) t0 -= q_[k][j] * v[j];
      t0_[k] = t0;
      for (std::size_t j = 0; j < n1; ++j) hor[j] = t0 * v[j];
      bch(*alg_, q_[k].data(), hor.data(), w.data());
      for (int i = first_layer; i <= s; ++i) {
        ub_[static_cast<std::size_t>(i - 1)][k] = metric_.norm_coords(*quotients_[static_cast<std::size_t>(i - 1)], w.data());
      }
    }

    std::vector<double> out(static_cast<std::size_t>(s), 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = first_layer; i <= s; ++i) {
      const auto& ub = ub_[static_cast<std::size_t>(i - 1)];
      if (i == 1) {
        // the first quotient is Euclidean; the projection is exact
        out[0] = pts_.empty() ? 0.0 : *std::max_element(ub.begin(), ub.end());
        continue;
      }
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return ub[a] > ub[b]; });
      const auto& q = *quotients_[static_cast<std::size_t>(i - 1)];
      double cur = 0.0;
      for (std::size_t k : order_) {
        if (ub[k] <= cur) break;
        LineGauge f(metric_, q, q_[k].data(), v);
        cur = std::max(cur, minimize_on_line(f, t0_[k], speed, -inf, inf, opt_, cur).distance);
      }
      out[static_cast<std::size_t>(i - 1)] = cur;
    }
    return out;
  }

 private:
  const HomogeneousMetric& metric_;
  AlgebraPtr alg_;
  std::vector<Coords> pts_;
  LineSearchOptions opt_;
  std::vector<AlgebraPtr> quotients_;
  std::vector<Coords> q_;
  std::vector<double> t0_;
  std::vector<std::vector<double>> ub_;
  std::vector<std::size_t> order_;
};

inline double stratified_value(const std::vector<double>& sups) {
  double v = 0.0;
  for (std::size_t i = 0; i < sups.size(); ++i) v += std::pow(sups[i], 2.0 * static_cast<double>(i + 1));
  return v;
}

inline double beta_from_value(double value, int step) { return std::pow(value, 1.0 / (2.0 * step)); }

/// A candidate line in the normalized frame: base u and unnormalized w.
struct FrameLine {
  Coords u;
  std::vector<double> w;
};

/// Maps simplex variables to a line: base clamped into the closed ball of
/// radius 2 by dilation, direction normalized.
class LineChart {
 public:
  LineChart(const HomogeneousMetric& metric, AlgebraPtr alg) : metric_(metric), alg_(std::move(alg)) {}

  std::size_t dim() const { return static_cast<std::size_t>(alg_->dim() + alg_->layer_size(1)); }

  std::vector<double> pack(const FrameLine& l) const {
    std::vector<double> x(l.u.begin(), l.u.end());
    x.insert(x.end(), l.w.begin(), l.w.end());
    return x;
  }

  /// Returns false if the direction vanishes.
  bool unpack(const std::vector<double>& x, Coords& base, std::vector<double>& v) const {
    const auto n = static_cast<std::size_t>(alg_->dim());
    base.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    v.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
    for (double c : base) {
      if (!std::isfinite(c)) return false;
    }
    const double len = euclidean_norm(v);
    if (!(len > 1e-300) || !std::isfinite(len)) return false;
    for (double& c : v) c /= len;
    const double nb = metric_.norm_coords(*alg_, base.data());
    if (nb > 2.0) {
      const double lam = 2.0 / nb;
      for (int i = 1; i <= alg_->step(); ++i) {
        const double f = std::pow(lam, i);
        for (int j = alg_->layer_offset(i); j < alg_->layer_offset(i) + alg_->layer_size(i); ++j) base[j] *= f;
      }
    }
    return true;
  }

 private:
  const HomogeneousMetric& metric_;
  AlgebraPtr alg_;
};

/// Principal direction of the first-layer coordinates by power iteration.
inline std::vector<double> principal_direction(const std::vector<Coords>& pts, int n1) {
  const auto d = static_cast<std::size_t>(n1);
  std::vector<double> mean(d, 0.0);
  for (const auto& p : pts) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += p[j] / static_cast<double>(pts.size());
  }
  std::vector<double> cov(d * d, 0.0);
  for (const auto& p : pts) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] += (p[a] - mean[a]) * (p[b] - mean[b]);
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += cov[a * d + a];
  std::vector<double> v(d, 0.0);
  v[0] = 1.0;
  if (!(trace > 0.0)) return v;
  for (std::size_t a = 0; a < d; ++a) v[a] = 1.0 + 0.1 * static_cast<double>(a);
  std::vector<double> nv(d);
  for (int iter = 0; iter < 500; ++iter) {
    for (std::size_t a = 0; a < d; ++a) {
      nv[a] = 0.0;
      for (std::size_t b = 0; b < d; ++b) nv[a] += cov[a * d + b] * v[b];
    }
    const double len = euclidean_norm(nv);
    if (!(len > 0.0)) break;
    double change = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      change = std::max(change, std::abs(nv[a] / len - v[a]));
      v[a] = nv[a] / len;
    }
    if (change < 1e-15) break;
  }
  return v;
}

inline std::vector<FrameLine> default_starts(const std::vector<Coords>& pts, const AlgebraPtr& alg,
                                             const BetaConfig& cfg) {
  const int n1 = alg->layer_size(1);
  const auto n = static_cast<std::size_t>(alg->dim());
  std::vector<FrameLine> starts;
  const auto dir = principal_direction(pts, n1);

  Coords mean(n, 0.0);
  for (const auto& p : pts) {
    for (std::size_t j = 0; j < n; ++j) mean[j] += p[j] / static_cast<double>(pts.size());
  }
  starts.push_back({mean, dir});

  std::size_t nearest = 0;
  double bestd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double dd = 0.0;
    for (int j = 0; j < n1; ++j) dd += (pts[k][j] - mean[j]) * (pts[k][j] - mean[j]);
    if (dd < bestd) {
      bestd = dd;
      nearest = k;
    }
  }
  starts.push_back({pts[nearest], dir});

  for (int k = 0; k < cfg.restarts; ++k) {
    Sampler rng(cfg.seed, static_cast<std::uint64_t>(k));
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pts.size()) - 1));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pts.size()) - 1));
    std::vector<double> w(static_cast<std::size_t>(n1));
    for (int j = 0; j < n1; ++j) w[j] = pts[b][j] - pts[a][j];
    if (k % 2 == 1 || euclidean_norm(w) < 1e-12) w = rng.unit_vector(n1);
    starts.push_back({pts[a], w});
  }
  return starts;
}

/// Greedy farthest-point subsample (first pick: farthest from the center).
inline std::vector<Coords> farthest_subsample(const HomogeneousMetric& metric, const StratifiedAlgebra& alg,
                                              const std::vector<Coords>& pts, std::size_t cap) {
  if (pts.size() <= cap) return pts;
  const auto n = static_cast<std::size_t>(alg.dim());
  std::vector<double> gap(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) gap[k] = metric.norm_coords(alg, pts[k].data());
  std::vector<Coords> out;
  Coords neg(n), d(n);
  while (out.size() < cap) {
    const auto pick = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    out.push_back(pts[pick]);
    for (std::size_t j = 0; j < n; ++j) neg[j] = -pts[pick][j];
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (gap[k] == 0.0) continue;
      bch(alg, neg.data(), pts[k].data(), d.data());
      gap[k] = std::min(gap[k], metric.norm_coords(alg, d.data()));
    }
    gap[pick] = 0.0;
  }
  return out;
}

struct FrameOptimum {
  FrameLine line;
  double value = std::numeric_limits<double>::infinity();
  int starts = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes either the stratified value (classical = false) or the top-layer
/// sup (classical = true) over lines in the normalized frame.
inline FrameOptimum optimize_lines(const HomogeneousMetric& metric, const AlgebraPtr& alg,
                                   const std::vector<Coords>& pts, std::vector<FrameLine> starts,
                                   const BetaConfig& cfg, bool classical) {
  const int s = alg->step();
  const bool subsample = cfg.max_opt_points > 0 && pts.size() > static_cast<std::size_t>(cfg.max_opt_points);
  BallProblem full(metric, alg, pts, cfg.line);
  std::optional<BallProblem> reduced;
  if (subsample) {
    reduced.emplace(metric, alg, farthest_subsample(metric, *alg, pts, static_cast<std::size_t>(cfg.max_opt_points)),
                    cfg.line);
  }
  LineChart chart(metric, alg);
  Coords base;
  std::vector<double> v;
  auto objective = [&](BallProblem& prob) {
    return [&, p = &prob](const std::vector<double>& x) {
      if (!chart.unpack(x, base, v)) return std::numeric_limits<double>::infinity();
      auto sp = p->sups(base.data(), v, classical ? s : 1);
      return classical ? sp.back() : stratified_value(sp);
    };
  };
  const std::vector<double> step(chart.dim(), 0.25);

  // the objective is nonnegative, so zero is a certified global minimum
  NelderMeadOptions search = cfg.simplex;
  search.target = std::max(search.target, 0.0);
  FrameOptimum best;
  BallProblem& working = subsample ? *reduced : full;
  for (const auto& start : starts) {
    if (best.value <= 0.0) break;
    auto r = nelder_mead(objective(working), chart.pack(start), step, search);
    ++best.starts;
    best.evaluations += r.evaluations;
    if (r.value < best.value) {
      best.value = r.value;
      best.converged = r.converged;
      chart.unpack(r.x, base, v);
      best.line = {base, v};
    }
  }
  if (subsample) {
    NelderMeadOptions polish = search;
    polish.max_evaluations = cfg.polish_evaluations;
    auto r = nelder_mead(objective(full), chart.pack(best.line), step, polish);
    best.evaluations += r.evaluations;
    chart.unpack(r.x, base, v);
    best.line = {base, v};
    best.converged = r.converged;
  }
  return best;
}

}  // namespace detail

/// sum_i (sup_{z in E, d(x,z) <= r} d(pi_i z, pi_i L) / r)^{2i} at a fixed line.
inline BetaObjective beta_objective(const HomogeneousMetric& metric, const HorizontalLine& line,
                                    const std::vector<GroupElement>& E, const GroupElement& x, double r,
                                    const LineSearchOptions& opt = {}, double ball_tolerance = 1e-12) {
  require_same_group(x, line.base());
  auto pts = detail::normalized_ball(metric, E, x, r, ball_tolerance);
  BetaObjective out;
  out.per_layer_sup.assign(static_cast<std::size_t>(x.algebra()->step()), 0.0);
  if (pts.empty()) return out;
  detail::BallProblem prob(metric, x.algebra(), std::move(pts), opt);
  const auto u = detail::normalize_element(x, r, line.base());
  out.per_layer_sup = prob.sups(u.data(), line.direction());
  out.value = detail::stratified_value(out.per_layer_sup);
  return out;
}

/// Classical beta: inf_L sup_z d(z, L) / r, with optional extra starting lines.
inline ClassicalBeta beta_classical(const HomogeneousMetric& metric, const std::vector<GroupElement>& E,
                                    const GroupElement& x, double r, const BetaConfig& cfg = {},
                                    const std::vector<HorizontalLine>& extra_starts = {}) {
  auto pts = detail::normalized_ball(metric, E, x, r, cfg.ball_tolerance);
  ClassicalBeta out;
  if (pts.empty()) return out;
  const auto& alg = x.algebra();
  auto starts = detail::default_starts(pts, alg, cfg);
  for (const auto& l : extra_starts) starts.push_back({detail::normalize_element(x, r, l.base()), l.direction()});
  auto opt = detail::optimize_lines(metric, alg, pts, std::move(starts), cfg, true);
  detail::BallProblem full(metric, alg, pts, cfg.line);
  out.value = full.sups(opt.line.u.data(), opt.line.w, alg->step()).back();
  out.line = HorizontalLine(detail::denormalize(alg, x, r, opt.line.u), opt.line.w);
  return out;
}

/// Stratified beta: (inf_L sum_i (sup_z d(pi_i z, pi_i L) / r)^{2i})^{1/(2s)}.
inline BetaReport beta_hat(const HomogeneousMetric& metric, const std::vector<GroupElement>& E,
                           const GroupElement& x, double r, const BetaConfig& cfg = {}) {
  auto pts = detail::normalized_ball(metric, E, x, r, cfg.ball_tolerance);
  const auto& alg = x.algebra();
  const int s = alg->step();
  BetaReport rep;
  rep.in_ball = pts.size();
  rep.per_layer_sup.assign(static_cast<std::size_t>(s), 0.0);
  if (pts.empty()) return rep;

  auto opt = detail::optimize_lines(metric, alg, pts, detail::default_starts(pts, alg, cfg), cfg, false);
  detail::BallProblem full(metric, alg, pts, cfg.line);
  rep.per_layer_sup = full.sups(opt.line.u.data(), opt.line.w);
  rep.beta_hat = detail::beta_from_value(detail::stratified_value(rep.per_layer_sup), s);
  rep.best_line = HorizontalLine(detail::denormalize(alg, x, r, opt.line.u), opt.line.w);
  rep.starts_used = opt.starts;
  rep.evaluations = opt.evaluations;
  rep.converged = opt.converged;

  if (cfg.with_classical) {
    // The stratified optimum is a feasible start, so beta <= beta_hat.
    detail::FrameLine hat_line{opt.line.u, opt.line.w};
    auto starts = detail::default_starts(pts, alg, cfg);
    starts.push_back(hat_line);
    auto c = detail::optimize_lines(metric, alg, pts, std::move(starts), cfg, true);
    double value = full.sups(c.line.u.data(), c.line.w, s).back();
    detail::FrameLine chosen = c.line;
    if (rep.per_layer_sup.back() < value) {
      value = rep.per_layer_sup.back();
      chosen = hat_line;
    }
    rep.beta_classical = value;
    rep.classical_line = HorizontalLine(detail::denormalize(alg, x, r, chosen.u), chosen.w);
  }
  return rep;
}

}  // namespace carnot
