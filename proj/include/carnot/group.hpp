#pragma once

// Carnot group arithmetic in exponential coordinates.

#include "carnot/algebra.hpp"

#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

namespace carnot {

/// A point of G written as (g_1, ..., g_s), g_i in R^{n_i}.
class GroupElement {
 public:
  GroupElement() = default;

  GroupElement(AlgebraPtr alg, Coords coords) : alg_(std::move(alg)), coords_(std::move(coords)) {
    if (!alg_) throw InvalidArgument("group element without algebra");
    if (static_cast<int>(coords_.size()) != alg_->dim()) {
      throw InvalidArgument("coordinate count " + std::to_string(coords_.size()) +
                            " does not match dimension " + std::to_string(alg_->dim()));
    }
    for (double x : coords_) {
      if (!std::isfinite(x)) throw InvalidArgument("non-finite coordinate");
    }
  }

  GroupElement(AlgebraPtr alg, std::initializer_list<double> coords)
      : GroupElement(std::move(alg), Coords(coords.begin(), coords.end())) {}

  GroupElement(AlgebraPtr alg, std::span<const double> coords)
      : GroupElement(std::move(alg), Coords(coords.begin(), coords.end())) {}

  static GroupElement identity(AlgebraPtr alg) {
    const auto n = static_cast<std::size_t>(alg->dim());
    return GroupElement(std::move(alg), Coords(n, 0.0));
  }

  /// (v, 0, ..., 0) for v in the first layer.
  static GroupElement horizontal(AlgebraPtr alg, std::span<const double> v) {
    if (static_cast<int>(v.size()) != alg->layer_size(1)) {
      throw InvalidArgument("horizontal vector has wrong length");
    }
    Coords c(static_cast<std::size_t>(alg->dim()), 0.0);
    std::copy(v.begin(), v.end(), c.begin());
    return GroupElement(std::move(alg), std::move(c));
  }

  const AlgebraPtr& algebra() const { return alg_; }
  const Coords& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  int dim() const { return static_cast<int>(coords_.size()); }

  /// Block g_i, 1-based.
  std::span<const double> layer(int i) const {
    return {coords_.data() + alg_->layer_offset(i), static_cast<std::size_t>(alg_->layer_size(i))};
  }

  double layer_norm(int i) const {
    double s = 0.0;
    for (double x : layer(i)) s += x * x;
    return std::sqrt(s);
  }

 private:
  friend struct GroupAccess;
  AlgebraPtr alg_;
  Coords coords_;
};

/// Unchecked construction for hot paths whose inputs are already valid.
struct GroupAccess {
  static GroupElement make(AlgebraPtr alg, Coords coords) {
    GroupElement g;
    g.alg_ = std::move(alg);
    g.coords_ = std::move(coords);
    return g;
  }
};

inline void require_same_group(const GroupElement& a, const GroupElement& b) {
  if (!a.algebra() || !b.algebra() || !a.algebra()->same_structure(*b.algebra())) {
    throw InvalidArgument("group elements belong to different algebras");
  }
}

namespace detail {

/// log(exp(U) exp(V)) truncated at the step; writes into out (size n, not
/// aliasing u or v).
inline void bch(const StratifiedAlgebra& alg, const double* u, const double* v, double* out) {
  const auto n = static_cast<std::size_t>(alg.dim());
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i] + v[i];
  if (alg.step() == 1) return;
  if (alg.step() == 2) {
    for (const auto& e : alg.entries()) out[e.k] += 0.5 * e.c * u[e.a] * v[e.b];
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  const auto& nodes = alg.bch_trie().nodes;
  thread_local std::vector<double> scratch;
  if (scratch.size() < nodes.size() * n) scratch.resize(nodes.size() * n);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto& node = nodes[j];
    const double* letter = node.letter == 0 ? u : v;
    double* val = scratch.data() + j * n;
    if (node.parent < 0) {
      for (std::size_t i = 0; i < n; ++i) val[i] = letter[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) val[i] = 0.0;
      alg.bracket_accumulate(letter, scratch.data() + static_cast<std::size_t>(node.parent) * n,
                             val);
    }
    if (node.coeff != 0.0) {
      for (std::size_t i = 0; i < n; ++i) out[i] += node.coeff * val[i];
    }
  }
}

}  // namespace detail

/// Group law through the BCH series; the series terminates at the step.
inline GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  require_same_group(a, b);
  Coords out(static_cast<std::size_t>(a.dim()));
  detail::bch(*a.algebra(), a.coords().data(), b.coords().data(), out.data());
  return GroupAccess::make(a.algebra(), std::move(out));
}

inline GroupElement operator*(const GroupElement& a, const GroupElement& b) { return multiply(a, b); }

/// exp(U)^{-1} = exp(-U).
inline GroupElement inverse(const GroupElement& g) {
  Coords c = g.coords();
  for (double& x : c) x = -x;
  return GroupAccess::make(g.algebra(), std::move(c));
}

/// delta_lambda: layer i scaled by lambda^i.
inline GroupElement dilate(double lambda, const GroupElement& g) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("dilation factor must be positive");
  const auto& alg = *g.algebra();
  Coords c = g.coords();
  double scale = 1.0;
  for (int i = 1; i <= alg.step(); ++i) {
    scale *= lambda;
    const int off = alg.layer_offset(i);
    for (int j = 0; j < alg.layer_size(i); ++j) c[static_cast<std::size_t>(off + j)] *= scale;
  }
  return GroupAccess::make(g.algebra(), std::move(c));
}

/// pi_i: drop layers above i. Lands in the step-i quotient group.
inline GroupElement project(int i, const GroupElement& g) {
  const auto& alg = *g.algebra();
  if (i < 1 || i > alg.step()) throw InvalidArgument("projection index out of range");
  if (i == alg.step()) return g;
  AlgebraPtr q = alg.quotient(i);
  Coords c(g.coords().begin(), g.coords().begin() + q->dim());
  return GroupAccess::make(std::move(q), std::move(c));
}

/// (g_1, 0, ..., 0). Not a homomorphism.
inline GroupElement horiz(const GroupElement& g) {
  Coords c(g.coords().size(), 0.0);
  const int n1 = g.algebra()->layer_size(1);
  std::copy(g.coords().begin(), g.coords().begin() + n1, c.begin());
  return GroupAccess::make(g.algebra(), std::move(c));
}

/// P_k(u, v): layer-k block of u*v minus u_k + v_k, for 2 <= k <= s.
inline std::vector<double> bch_polynomial(int k, const GroupElement& u, const GroupElement& v) {
  const auto& alg = *u.algebra();
  if (k < 2 || k > alg.step()) throw InvalidArgument("BCH polynomial index out of range");
  const GroupElement w = multiply(u, v);
  std::vector<double> p;
  const auto wl = w.layer(k), ul = u.layer(k), vl = v.layer(k);
  for (std::size_t j = 0; j < wl.size(); ++j) p.push_back(wl[j] - ul[j] - vl[j]);
  return p;
}

inline double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace carnot
