#pragma once

// Farthest-insertion open tours and the tour-length / gamma_hat diagnostic.

#include "carnot/carleson.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace carnot {

struct InsertionStep {
  std::size_t point = 0;
  /// Position in the path before which the point was inserted.
  std::size_t position = 0;
  /// Distance from the point to the tour at selection time.
  double selection_distance = 0.0;
  double cost_increase = 0.0;
};

struct Tour {
  std::vector<std::size_t> ordering;
  double cost = 0.0;
  std::vector<InsertionStep> trace;
};

inline double tour_cost(const HomogeneousMetric& metric, const std::vector<std::size_t>& ordering,
                        const std::vector<GroupElement>& E) {
  if (ordering.size() != E.size()) throw InvalidArgument("ordering is not a permutation of the input");
  std::vector<char> seen(E.size(), 0);
  for (std::size_t i : ordering) {
    if (i >= E.size() || seen[i]) throw InvalidArgument("ordering is not a permutation of the input");
    seen[i] = 1;
  }
  double c = 0.0;
  for (std::size_t k = 1; k < ordering.size(); ++k) c += distance(metric, E[ordering[k - 1]], E[ordering[k]]);
  return c;
}

/// Starts from a farthest pair, then repeatedly inserts the point farthest
/// from the current path at its cheapest position (ends included). Ties go
/// to the lowest index / earliest position.
inline Tour farthest_insertion(const HomogeneousMetric& metric, const std::vector<GroupElement>& E) {
  if (E.empty()) throw InvalidArgument("tour of an empty set");
  const std::size_t n = E.size();
  Tour tour;
  if (n == 1) {
    tour.ordering = {0};
    return tour;
  }
  std::size_t a = 0, b = 1;
  double dmax = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(metric, E[i], E[j]);
      if (d > dmax) {
        dmax = d;
        a = i;
        b = j;
      }
    }
  }
  std::vector<std::size_t>& path = tour.ordering;
  path = {a, b};
  std::vector<double> edges{dmax};  // edges[k] = d(path[k], path[k+1])
  std::vector<char> in_path(n, 0);
  in_path[a] = in_path[b] = 1;
  std::vector<double> gap(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!in_path[j]) gap[j] = std::min(distance(metric, E[j], E[a]), distance(metric, E[j], E[b]));
  }

  std::vector<double> to_path;
  for (std::size_t added = 2; added < n; ++added) {
    std::size_t p = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_path[j] && (p == n || gap[j] > gap[p])) p = j;
    }
    to_path.resize(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) to_path[k] = distance(metric, E[p], E[path[k]]);

    std::size_t pos = 0;
    double best = to_path.front();
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const double inc = to_path[k] + to_path[k + 1] - edges[k];
      if (inc < best) {
        best = inc;
        pos = k + 1;
      }
    }
    if (to_path.back() < best) {
      best = to_path.back();
      pos = path.size();
    }

    tour.trace.push_back({p, pos, gap[p], best});
    if (pos == 0) {
      edges.insert(edges.begin(), to_path.front());
    } else if (pos == path.size()) {
      edges.push_back(to_path.back());
    } else {
      edges[pos - 1] = to_path[pos - 1];
      edges.insert(edges.begin() + static_cast<std::ptrdiff_t>(pos), to_path[pos]);
    }
    path.insert(path.begin() + static_cast<std::ptrdiff_t>(pos), p);
    in_path[p] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_path[j]) gap[j] = std::min(gap[j], distance(metric, E[j], E[p]));
    }
  }
  tour.cost = tour_cost(metric, path, E);
  return tour;
}

struct SufficiencyReport {
  double tour_cost = 0.0;
  double gamma_hat = 0.0;
  double ratio = 0.0;
};

inline SufficiencyReport sufficiency_ratio(const HomogeneousMetric& metric, const std::vector<GroupElement>& E,
                                           int n_min, int n_max, const CarlesonConfig& cfg = {}) {
  if (E.size() < 2) throw InvalidArgument("sufficiency ratio needs at least two points");
  std::vector<std::size_t> idx(E.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto coords_less = [&](std::size_t i, std::size_t j) {
    return std::lexicographical_compare(E[i].coords().begin(), E[i].coords().end(), E[j].coords().begin(),
                                        E[j].coords().end());
  };
  std::sort(idx.begin(), idx.end(), coords_less);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (!coords_less(idx[k - 1], idx[k])) throw InvalidArgument("sufficiency ratio needs distinct points");
  }
  SufficiencyReport rep;
  rep.tour_cost = farthest_insertion(metric, E).cost;
  rep.gamma_hat = gamma_hat(metric, E, n_min, n_max, cfg);
  rep.ratio = rep.tour_cost / rep.gamma_hat;
  return rep;
}

}  // namespace carnot
