#pragma once

// Derivative-free simplex minimization with dimension-adaptive coefficients.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace carnot {

struct NelderMeadOptions {
  int max_evaluations = 400;
  /// Stop when f_worst - f_best <= ftol_abs + ftol_rel * |f_best| ...
  double ftol_abs = 1e-14;
  double ftol_rel = 1e-9;
  /// ... and the simplex fits in a box of this half-width.
  double xtol = 1e-7;
  /// Stop as soon as a value <= target is seen.
  double target = -std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t d = x0.size();
  const double dd = static_cast<double>(std::max<std::size_t>(d, 1));
  const double alpha = 1.0, beta = 1.0 + 2.0 / dd, gamma = 0.75 - 1.0 / (2.0 * dd), delta = 1.0 - 1.0 / dd;

  NelderMeadResult res;
  std::vector<std::vector<double>> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - (d > 0 ? 1 : 0)];

    double spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j < d; ++j) spread = std::max(spread, std::abs(pts[i][j] - pts[best][j]));
    }
    const bool flat = vals[worst] - vals[best] <= opt.ftol_abs + opt.ftol_rel * std::abs(vals[best]);
    if ((flat && spread <= opt.xtol) || d == 0 || vals[best] <= opt.target) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j] / dd;
    }
    for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - pts[worst][j]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      for (std::size_t j = 0; j < d; ++j) xe[j] = centroid[j] + beta * (xr[j] - centroid[j]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t j = 0; j < d; ++j) {
      xc[j] = outside ? centroid[j] + gamma * (xr[j] - centroid[j]) : centroid[j] - gamma * (centroid[j] - pts[worst][j]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) pts[i][j] = pts[best][j] + delta * (pts[i][j] - pts[best][j]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

}  // namespace carnot
