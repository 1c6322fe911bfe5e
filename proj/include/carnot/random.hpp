#pragma once

// Seeded sampling helpers. Every randomized routine derives one engine per
// (seed, sample index) so results do not depend on evaluation order.

#include "carnot/group.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace carnot {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  /// Uniform on the unit sphere of R^d.
  std::vector<double> unit_vector(int d) {
    std::vector<double> v(static_cast<std::size_t>(d));
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (double& x : v) {
        x = normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
    }
    for (double& x : v) x /= norm;
    return v;
  }

  /// Uniform in the closed Euclidean ball of radius r in R^d.
  std::vector<double> ball_point(int d, double r) {
    auto v = unit_vector(d);
    const double rad = r * std::pow(uniform(), 1.0 / d);
    for (double& x : v) x *= rad;
    return v;
  }

  /// Coordinates i.i.d. uniform in [-half_width, half_width].
  GroupElement box_element(const AlgebraPtr& alg, double half_width) {
    Coords c(static_cast<std::size_t>(alg->dim()));
    for (double& x : c) x = uniform(-half_width, half_width);
    return GroupElement(alg, std::move(c));
  }

  /// Each layer block g_i uniform in the Euclidean ball of radius radius[i-1].
  GroupElement layered_ball_element(const AlgebraPtr& alg, std::span<const double> radius) {
    Coords c(static_cast<std::size_t>(alg->dim()), 0.0);
    for (int i = 1; i <= alg->step(); ++i) {
      auto b = ball_point(alg->layer_size(i), radius[static_cast<std::size_t>(i - 1)]);
      std::copy(b.begin(), b.end(), c.begin() + alg->layer_offset(i));
    }
    return GroupElement(alg, std::move(c));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace carnot
