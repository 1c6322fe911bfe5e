#include "carnot/carleson.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace carnot;

namespace {

std::vector<GroupElement> unit_segment(const AlgebraPtr& alg, int m) {
  std::vector<double> e1(static_cast<std::size_t>(alg->layer_size(1)), 0.0);
  e1[0] = 1.0;
  return detail::segment_points({GroupElement::identity(alg), GroupElement::horizontal(alg, e1)}, m);
}

// Simpson quadrature of (1/2)(x dy - y dx) along the translated planar circle.
double contact_area(double R, double theta) {
  const int n = 2000;
  const double h = theta / n;
  auto integrand = [&](double t) {
    const double x = R * (std::cos(t) - 1), y = R * std::sin(t);
    const double dx = -R * std::sin(t), dy = R * std::cos(t);
    return 0.5 * (x * dy - y * dx);
  };
  double s = integrand(0) + integrand(theta);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * integrand(k * h);
  return s * h / 3;
}

}  // namespace

TEST(Net, InvariantsOnSegment) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  EXPECT_THROW(build_net(m, {}, 0), InvalidArgument);
  auto one = build_net(m, {GroupElement::identity(h)}, 5);
  EXPECT_EQ(one.centers, std::vector<std::size_t>{0});

  auto E = unit_segment(h, 64);
  auto net = build_net(m, E, 2);
  EXPECT_EQ(net.separation, 0.25);
  for (std::size_t a = 0; a < net.centers.size(); ++a) {
    for (std::size_t b = a + 1; b < net.centers.size(); ++b) {
      EXPECT_GE(distance(m, E[net.centers[a]], E[net.centers[b]]), 0.25);
    }
  }
  for (const auto& p : E) {
    double cover = std::numeric_limits<double>::infinity();
    for (std::size_t c : net.centers) cover = std::min(cover, distance(m, p, E[c]));
    EXPECT_LE(cover, 0.25);
  }
}

TEST(Net, RandomInvariantsAndMonotoneCardinality) {
  Sampler rng(8);
  for (auto alg : {heisenberg(1), engel()}) {
    auto m = HomogeneousMetric::hebisch_sikora(0.5);
    std::vector<GroupElement> E;
    for (int k = 0; k < 300; ++k) E.push_back(rng.box_element(alg, 1));
    std::size_t prev = 0;
    for (int n = -1; n <= 5; ++n) {
      auto net = build_net(m, E, n);
      EXPECT_GE(net.centers.size(), prev);
      prev = net.centers.size();
      for (std::size_t a = 0; a < net.centers.size(); ++a) {
        for (std::size_t b = a + 1; b < net.centers.size(); ++b) {
          EXPECT_GE(distance(m, E[net.centers[a]], E[net.centers[b]]), net.separation);
        }
      }
      for (const auto& p : E) {
        double cover = std::numeric_limits<double>::infinity();
        for (std::size_t c : net.centers) cover = std::min(cover, distance(m, p, E[c]));
        EXPECT_LT(cover, net.separation);
      }
    }
  }
}

TEST(Net, BallFamilyRadii) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto E = unit_segment(h, 33);
  auto fam = ball_family(m, E, -1, 4);
  std::size_t expected = 0;
  for (int n = -1; n <= 4; ++n) expected += build_net(m, E, n).centers.size();
  EXPECT_EQ(fam.size(), expected);
  for (const auto& b : fam) EXPECT_EQ(b.radius, 10.0 * std::ldexp(1.0, -b.level));
  EXPECT_THROW(ball_family(m, E, 3, 2), InvalidArgument);
}

TEST(Carleson, TrivialSets) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto single = std::vector<GroupElement>{GroupElement(h, {0.2, 0.1, 0.3})};
  EXPECT_EQ(carleson_sum(m, single, 0, 6).total, 0.0);
  EXPECT_EQ(gamma_hat(m, single, 0, 6), 0.0);
  EXPECT_EQ(carleson_sum(m, {}, 0, 3).total, 0.0);
  EXPECT_THROW(gamma_hat(m, {}, 0, 3), InvalidArgument);
  EXPECT_THROW(carleson_sum(m, single, 2, 1), InvalidArgument);

  std::vector<GroupElement> pair{GroupElement::identity(h), GroupElement(h, {1, 0, 0})};
  EXPECT_EQ(gamma_hat(m, pair, 0, 6), 1.0);
}

TEST(Carleson, HorizontalSegmentIsFlat) {
  for (auto alg : {heisenberg(1), engel()}) {
    for (const auto& m : {HomogeneousMetric::infinity_unit(alg->step()), HomogeneousMetric::hebisch_sikora(0.5)}) {
      auto E = unit_segment(alg, 64);
      auto res = carleson_sum(m, E, 0, 5);
      EXPECT_LE(res.total, 1e-4);
      EXPECT_NEAR(gamma_hat(m, E, 0, 5), diameter(m, E), 1e-4);
    }
  }
}

TEST(Carleson, AdditiveOverLevels) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto E = detail::circle_points({h, 1.0}, 96);
  auto whole = carleson_sum(m, E, 0, 4);
  auto low = carleson_sum(m, E, 0, 1);
  auto high = carleson_sum(m, E, 2, 4);
  ASSERT_EQ(whole.levels.size(), 5u);
  double sum = 0.0;
  for (const auto& lv : whole.levels) sum += lv.sum;
  EXPECT_EQ(whole.total, sum);
  for (int n = 0; n <= 4; ++n) {
    const auto& part = n <= 1 ? low.levels[static_cast<std::size_t>(n)] : high.levels[static_cast<std::size_t>(n - 2)];
    EXPECT_EQ(whole.levels[static_cast<std::size_t>(n)].level, n);
    EXPECT_EQ(whole.levels[static_cast<std::size_t>(n)].sum, part.sum);
    EXPECT_EQ(whole.levels[static_cast<std::size_t>(n)].balls, part.balls);
  }
  EXPECT_GT(whole.total, 0.0);

  // depth monotonicity of gamma_hat
  double prev = 0.0;
  for (int d = 0; d <= 4; ++d) {
    const double g = gamma_hat(m, E, 0, d);
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(Carleson, ThreadCountDoesNotChangeResult) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto E = detail::circle_points({h, 1.0}, 64);
  CarlesonConfig one, four;
  four.threads = 4;
  auto a = carleson_sum(m, E, 0, 3, one);
  auto b = carleson_sum(m, E, 0, 3, four);
  EXPECT_EQ(a.total, b.total);
}

TEST(Carleson, ShuffledNetOrder) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto E = detail::circle_points({h, 1.0}, 64);
  std::vector<std::size_t> rev(E.size());
  for (std::size_t k = 0; k < rev.size(); ++k) rev[k] = rev.size() - 1 - k;
  auto net = build_net(m, E, 3, &rev);
  EXPECT_EQ(net.centers.front(), E.size() - 1);
  for (std::size_t a = 0; a < net.centers.size(); ++a) {
    for (std::size_t b = a + 1; b < net.centers.size(); ++b) {
      EXPECT_GE(distance(m, E[net.centers[a]], E[net.centers[b]]), net.separation);
    }
  }
  std::vector<std::size_t> short_order{0, 1};
  EXPECT_THROW(build_net(m, E, 3, &short_order), InvalidArgument);

  CarlesonConfig plain, s1, s1b, s2;
  s1.net_shuffle_seed = s1b.net_shuffle_seed = 5;
  s2.net_shuffle_seed = 6;
  auto a = carleson_sum(m, E, 0, 4, plain);
  auto b = carleson_sum(m, E, 0, 4, s1);
  auto c = carleson_sum(m, E, 0, 4, s1b);
  auto d = carleson_sum(m, E, 0, 4, s2);
  EXPECT_EQ(b.total, c.total);
  for (const auto* r : {&b, &d}) {
    EXPECT_GT(r->total, 0.5 * a.total);
    EXPECT_LT(r->total, 2.0 * a.total);
  }
}

TEST(Carleson, DilationCovariance) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto E = detail::circle_points({h, 0.5}, 80);
  std::vector<GroupElement> dE;
  for (const auto& p : E) dE.push_back(dilate(4.0, p));
  const double base = gamma_hat(m, E, 1, 5);
  const double scaled = gamma_hat(m, dE, -1, 3);
  EXPECT_NEAR(scaled, 4.0 * base, 0.05 * 4.0 * base);
}

TEST(Curves, SegmentEndpoints) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  GroupElement a(h, {0.3, -0.1, 0.7});
  GroupElement b = a * GroupElement::horizontal(h, std::vector<double>{0.4, 0.2});
  auto s = sample_curve(SegmentCurve{a, b}, 2, m);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points[0].coords(), a.coords());
  EXPECT_EQ(s.points[1].coords(), b.coords());
  EXPECT_NEAR(s.chain_length, std::hypot(0.4, 0.2), 1e-14);

  auto many = sample_curve(SegmentCurve{a, b}, 17, m);
  EXPECT_LT(horizontality_residual(many.points), 1e-14);
  EXPECT_NEAR(many.chain_length, std::hypot(0.4, 0.2), 1e-12);

  EXPECT_THROW(sample_curve(SegmentCurve{a, GroupElement(h, {1, 1, 1})}, 5, m), InvalidArgument);
  EXPECT_THROW(sample_curve(SegmentCurve{a, b}, 1, m), InvalidArgument);
}

TEST(Curves, CircleLiftMatchesContactForm) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  for (double R : {1.0, 0.3}) {
    auto s = sample_curve(CircleLiftCurve{h, R}, 257, m);
    for (std::size_t k = 0; k < s.points.size(); k += 16) {
      const double th = 2 * std::numbers::pi * static_cast<double>(k) / 256;
      const auto& p = s.points[k];
      EXPECT_NEAR(p[0], R * (std::cos(th) - 1), 1e-14);
      EXPECT_NEAR(p[1], R * std::sin(th), 1e-14);
      EXPECT_NEAR(p[2], contact_area(R, th), 1e-11);
    }
  }
}

TEST(Curves, CircleLiftHorizontality) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  std::vector<double> ratios;
  for (int count : {256, 512, 1024}) {
    auto s = sample_curve(CircleLiftCurve{h, 1.0}, count, m);
    const double dth = 2 * std::numbers::pi / (count - 1);
    ratios.push_back(horizontality_residual(s.points) / (dth * dth));
    EXPECT_NEAR(s.chain_length, 2 * std::numbers::pi, 1e-3);
  }
  for (double r : ratios) EXPECT_LT(r, 1.0);
  EXPECT_LE(ratios[2], ratios[0]);
}

TEST(Curves, CircleLiftInHigherHeisenberg) {
  auto h2 = heisenberg(2);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto s = sample_curve(CircleLiftCurve{h2, 1.0}, 300, m);
  const double dth = 2 * std::numbers::pi / 299;
  EXPECT_LT(horizontality_residual(s.points) / (dth * dth), 1.0);
  EXPECT_THROW(sample_curve(CircleLiftCurve{engel(), 1.0}, 10, m), InvalidArgument);
  EXPECT_THROW(sample_curve(CircleLiftCurve{h2, -1.0}, 10, m), InvalidArgument);
}

TEST(Curves, ZigzagChainLength) {
  for (auto alg : {heisenberg(1), engel()}) {
    auto m = HomogeneousMetric::infinity_unit(alg->step());
    for (int corners : {0, 1, 4, 9}) {
      ZigzagCurve z{alg, corners, 0.3};
      auto s = sample_curve(z, 200, m);
      EXPECT_EQ(s.points.size(), 200u);
      EXPECT_LT(horizontality_residual(s.points), 1e-12);
      const double planar = (corners + 1) * std::hypot(1.0 / (corners + 1), 0.3);
      EXPECT_NEAR(s.chain_length, planar, 1e-10);
      EXPECT_NE(s.descriptor.find("zigzag"), std::string::npos);
    }
    EXPECT_THROW(sample_curve(ZigzagCurve{alg, 5, 0.3}, 4, m), InvalidArgument);
  }
}
