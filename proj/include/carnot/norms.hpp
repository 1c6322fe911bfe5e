#pragma once

// Homogeneous norms on Carnot groups: the l-infinity type gauge
// max_i lambda_i |g_i|^{1/i} and the Hebisch-Sikora Minkowski gauge of the
// Euclidean ball of radius eta. One parameter set serves G and every quotient
// pi_i(G).

#include "carnot/group.hpp"
#include "carnot/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace carnot {

class HomogeneousMetric {
 public:
  enum class Kind { Infinity, HebischSikora };

  /// N(g) = max_i lambdas[i-1] |g_i|^{1/i}.
  static HomogeneousMetric infinity(std::vector<double> lambdas) {
    if (lambdas.empty()) throw InvalidArgument("infinity metric needs at least one weight");
    for (double l : lambdas) {
      if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("metric weights must be positive");
    }
    HomogeneousMetric m;
    m.kind_ = Kind::Infinity;
    m.lambdas_ = std::move(lambdas);
    return m;
  }

  /// All weights 1, the normalization used in formula-level statements.
  static HomogeneousMetric infinity_unit(int step) {
    return infinity(std::vector<double>(static_cast<std::size_t>(step), 1.0));
  }

  /// N(g) = inf{lambda > 0 : delta_{1/lambda} g in B_{R^n}(eta)}.
  static HomogeneousMetric hebisch_sikora(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("gauge radius must be positive");
    HomogeneousMetric m;
    m.kind_ = Kind::HebischSikora;
    m.eta_ = eta;
    return m;
  }

  Kind kind() const { return kind_; }
  double eta() const { return eta_; }
  const std::vector<double>& lambdas() const { return lambdas_; }

  std::string describe() const {
    if (kind_ == Kind::HebischSikora) return "hs(eta=" + fmt(eta_) + ")";
    std::string s = "inf(lambdas=";
    for (std::size_t i = 0; i < lambdas_.size(); ++i) s += (i ? "," : "") + fmt(lambdas_[i]);
    return s + ")";
  }

  /// Norm of raw coordinates of an element of `alg` (no allocation).
  double norm_coords(const StratifiedAlgebra& alg, const double* g) const {
    const int s = alg.step();
    if (kind_ == Kind::Infinity) {
      if (static_cast<int>(lambdas_.size()) < s) {
        throw InvalidArgument("metric has fewer weights than the group has layers");
      }
      double best = 0.0;
      for (int i = 1; i <= s; ++i) {
        const double r = layer_norm(alg, g, i);
        double root;
        if (i == 1) root = r;
        else if (i == 2) root = std::sqrt(r);
        else if (i == 3) root = std::cbrt(r);
        else root = std::pow(r, 1.0 / i);
        best = std::max(best, lambdas_[static_cast<std::size_t>(i - 1)] * root);
      }
      return best;
    }
    boost::container::small_vector<double, 8> sq(static_cast<std::size_t>(s));
    for (int i = 1; i <= s; ++i) {
      const double r = layer_norm(alg, g, i);
      sq[static_cast<std::size_t>(i - 1)] = r * r;
    }
    return hs_gauge(sq.data(), s, eta_);
  }

  /// Solves sum_i a_i / lambda^{2i} = eta^2 for lambda, a_i = |g_i|^2.
  /// With mu = 1/lambda^2 the left side is a polynomial in mu with
  /// nonnegative coefficients, hence increasing and convex on mu > 0;
  /// Newton started from the upper end of the bracket
  ///   mu in [1/(s m^2), 1/m^2],  m = max_i (sqrt(a_i)/eta)^{1/i}
  /// then decreases monotonically onto the root.
  static double hs_gauge(const double* a, int s, double eta) {
    if (s == 1) return std::sqrt(a[0]) / eta;
    if (s == 2) {
      // a_2 mu^2 + a_1 mu - eta^2 = 0, cancellation-free root
      if (a[0] == 0.0 && a[1] == 0.0) return 0.0;
      const double e2 = eta * eta;
      const double mu = 2.0 * e2 / (a[0] + std::sqrt(a[0] * a[0] + 4.0 * a[1] * e2));
      return 1.0 / std::sqrt(mu);
    }
    double m = 0.0;
    for (int i = 1; i <= s; ++i) {
      if (a[i - 1] > 0.0) m = std::max(m, std::pow(std::sqrt(a[i - 1]) / eta, 1.0 / i));
    }
    if (m == 0.0) return 0.0;
    const double target = eta * eta;
    const double mu_lo = 1.0 / (s * m * m);
    double mu = 1.0 / (m * m);
    for (int iter = 0; iter < 200; ++iter) {
      double h = -target, dh = 0.0, p = 1.0;  // p = mu^{i-1}
      for (int i = 1; i <= s; ++i) {
        dh += i * a[i - 1] * p;
        p *= mu;
        h += a[i - 1] * p;
      }
      if (h <= 0.0 || dh <= 0.0) break;
      double next = mu - h / dh;
      if (next < mu_lo) next = 0.5 * (mu + mu_lo);
      if (!(next < mu)) break;
      const bool done = mu - next <= 1e-16 * mu;
      mu = next;
      if (done) break;
    }
    return 1.0 / std::sqrt(mu);
  }

 private:
  static double layer_norm(const StratifiedAlgebra& alg, const double* g, int i) {
    const int off = alg.layer_offset(i);
    double s = 0.0;
    for (int j = 0; j < alg.layer_size(i); ++j) s += g[off + j] * g[off + j];
    return std::sqrt(s);
  }

  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  Kind kind_ = Kind::Infinity;
  std::vector<double> lambdas_;
  double eta_ = 1.0;
};

inline double norm(const HomogeneousMetric& metric, const GroupElement& g) {
  return metric.norm_coords(*g.algebra(), g.coords().data());
}

/// d(a, b) = N(a^{-1} b).
inline double distance(const HomogeneousMetric& metric, const GroupElement& a, const GroupElement& b) {
  require_same_group(a, b);
  const auto& alg = *a.algebra();
  Coords neg = a.coords();
  for (double& x : neg) x = -x;
  Coords out(neg.size());
  detail::bch(alg, neg.data(), b.coords().data(), out.data());
  return metric.norm_coords(alg, out.data());
}

/// NH(g) = d(g, horiz(g)).
inline double nh(const HomogeneousMetric& metric, const GroupElement& g) {
  return distance(metric, g, horiz(g));
}

// ---------------------------------------------------------------------------
// Calibration of the smallness parameter

struct CalibrationOptions {
  double grid_max = 1.0;
  double grid_floor = 1e-6;
  /// Ratio between consecutive grid values.
  double grid_ratio = 0.5;
  double relative_tolerance = 1e-12;
};

struct CalibrationResult {
  HomogeneousMetric metric;
  double parameter = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// (parameter, violation count) for every grid value probed.
  std::vector<std::pair<double, std::size_t>> census;
};

namespace detail {

inline HomogeneousMetric metric_with_parameter(HomogeneousMetric::Kind kind, int step, double p) {
  if (kind == HomogeneousMetric::Kind::HebischSikora) return HomogeneousMetric::hebisch_sikora(p);
  std::vector<double> l(static_cast<std::size_t>(step), p);
  l[0] = 1.0;
  return HomogeneousMetric::infinity(std::move(l));
}

struct SubadditivityCount {
  std::size_t violations = 0;
  double worst_excess = 0.0;  // max (N(gh) - N(g) - N(h)) / (N(g) + N(h))
};

/// Pair i draws g, h with coordinates uniform in [-1, 1] and h dilated by
/// 2^{U(-3,3)}; subadditivity is tested on G and each quotient.
inline SubadditivityCount count_subadditivity_violations(const HomogeneousMetric& metric,
                                                         const AlgebraPtr& alg, std::size_t samples,
                                                         std::uint64_t seed, double rel_tol) {
  SubadditivityCount out;
  for (std::size_t i = 0; i < samples; ++i) {
    Sampler rng(seed, i);
    auto g = rng.box_element(alg, 1.0);
    auto h = dilate(std::exp2(rng.uniform(-3.0, 3.0)), rng.box_element(alg, 1.0));
    const auto gh = g * h;
    bool bad = false;
    for (int k = 1; k <= alg->step(); ++k) {
      const auto& q = *alg->quotient(k);
      const double lhs = metric.norm_coords(q, gh.coords().data());
      const double rhs = metric.norm_coords(q, g.coords().data()) + metric.norm_coords(q, h.coords().data());
      if (lhs > rhs * (1.0 + rel_tol)) {
        bad = true;
        out.worst_excess = std::max(out.worst_excess, (lhs - rhs) / rhs);
      }
    }
    if (bad) ++out.violations;
  }
  return out;
}

}  // namespace detail

/// Largest grid value of the smallness parameter (eta for Hebisch-Sikora, the
/// common weight on layers 2..s for the infinity gauge) with no sampled
/// subadditivity violation. Grid values are grid_max * grid_ratio^j.
inline CalibrationResult calibrate(HomogeneousMetric::Kind kind, const AlgebraPtr& alg,
                                   std::size_t samples, std::uint64_t seed,
                                   const CalibrationOptions& opt = {}) {
  if (samples < 1) throw InvalidArgument("calibration needs at least one sample");
  std::vector<double> grid;
  for (double p = opt.grid_max; p >= opt.grid_floor * (1 - 1e-12); p *= opt.grid_ratio) grid.push_back(p);

  CalibrationResult result;
  result.samples = samples;
  result.seed = seed;
  auto probe = [&](std::size_t j) {
    auto metric = detail::metric_with_parameter(kind, alg->step(), grid[j]);
    auto c = detail::count_subadditivity_violations(metric, alg, samples, seed, opt.relative_tolerance);
    result.census.emplace_back(grid[j], c.violations);
    return c;
  };

  auto finish = [&](std::size_t j) {
    result.parameter = grid[j];
    result.metric = detail::metric_with_parameter(kind, alg->step(), grid[j]);
    return result;
  };

  if (probe(0).violations == 0) return finish(0);
  std::size_t fail = 0, pass = grid.size() - 1;
  auto last = probe(pass);
  if (last.violations > 0) {
    throw NumericalFailure("calibration exhausted the parameter grid at " + std::to_string(grid[pass]) +
                           "; worst relative subadditivity excess " + std::to_string(last.worst_excess));
  }
  while (pass - fail > 1) {
    const std::size_t mid = (pass + fail) / 2;
    if (probe(mid).violations == 0) pass = mid;
    else fail = mid;
  }
  return finish(pass);
}

}  // namespace carnot
