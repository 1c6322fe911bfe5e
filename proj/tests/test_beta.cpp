#include "carnot/beta.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace carnot;

namespace {

std::vector<GroupElement> fixture(const AlgebraPtr& h) {
  return {GroupElement(h, {-1, 0, 0}), GroupElement(h, {1, 0, 0}), GroupElement(h, {0, 0, 0.25})};
}

// Dense t-grid distance, independent of the library's line search.
double grid_line_distance(const HomogeneousMetric& m, const GroupElement& p, const HorizontalLine& l, double lo,
                          double hi, int nodes) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= nodes; ++k) best = std::min(best, distance(m, p, line_point(l, lo + (hi - lo) * k / nodes)));
  return best;
}

// Lines of heisenberg(1) up to reparametrization: direction angle theta,
// perpendicular first-layer offset a, height c at the foot point.
HorizontalLine chart_line(const AlgebraPtr& h, double theta, double a, double c) {
  const double ct = std::cos(theta), st = std::sin(theta);
  return HorizontalLine(GroupElement(h, {-a * st, a * ct, c}), {ct, st});
}

// Coarse-to-fine exhaustive grid over (theta, a, c), final resolution 1e-3.
double grid_oracle(const HomogeneousMetric& m, const std::vector<GroupElement>& E, const GroupElement& x, double r,
                   bool classical) {
  const auto& h = x.algebra();
  auto value = [&](double th, double a, double c) {
    auto obj = beta_objective(m, chart_line(h, th, a, c), E, x, r);
    return classical ? obj.per_layer_sup.back() : std::pow(obj.value, 0.25);
  };
  double bt = 0, ba = 0, bc = 0, best = std::numeric_limits<double>::infinity();
  const double pi = std::numbers::pi;
  for (int i = 0; i < 36; ++i) {
    for (int j = -20; j <= 20; ++j) {
      for (int k = -20; k <= 20; ++k) {
        const double th = pi * i / 36, a = 0.1 * j, c = 0.1 * k;
        const double v = value(th, a, c);
        if (v < best) best = v, bt = th, ba = a, bc = c;
      }
    }
  }
  for (double step : {0.02, 0.004, 0.001}) {
    const double ct = bt, ca = ba, cc = bc;
    for (int i = -5; i <= 5; ++i) {
      for (int j = -5; j <= 5; ++j) {
        for (int k = -5; k <= 5; ++k) {
          const double th = ct + step * i, a = ca + step * j, c = cc + step * k;
          const double v = value(th, a, c);
          if (v < best) best = v, bt = th, ba = a, bc = c;
        }
      }
    }
  }
  return best;
}

std::vector<GroupElement> collinear(const HorizontalLine& l, int count, double span) {
  std::vector<GroupElement> out;
  for (int k = 0; k < count; ++k) out.push_back(line_point(l, -span + 2 * span * k / (count - 1)));
  return out;
}

}  // namespace

TEST(Beta, ObjectiveExamples) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto o = GroupElement::identity(h);
  HorizontalLine x_axis(o, {1.0, 0.0});
  EXPECT_EQ(beta_objective(m, x_axis, collinear(x_axis, 20, 1.0), o, 2.0).value, 0.0);
  EXPECT_EQ(beta_objective(m, x_axis, {o}, o, 1.0).value, 0.0);
  EXPECT_EQ(beta_objective(m, x_axis, {GroupElement(h, {5, 5, 5})}, o, 1.0).value, 0.0);
  EXPECT_THROW(beta_objective(m, x_axis, {o}, o, 0.0), InvalidArgument);

  // layer 2 is set by the lifted point: d_inf((0,0,1/4), x-axis) / 2
  auto E = fixture(h);
  auto obj = beta_objective(m, x_axis, E, o, 2.0);
  const double d = grid_line_distance(m, E[2], x_axis, -2, 2, 40000);
  EXPECT_NEAR(obj.per_layer_sup[0], 0.0, 1e-15);
  EXPECT_NEAR(obj.per_layer_sup[1], d / 2, 1e-7);
  EXPECT_NEAR(obj.per_layer_sup[1], 0.25, 1e-9);
  EXPECT_NEAR(obj.value, std::pow(0.25, 4), 1e-10);
}

TEST(Beta, ObjectiveEquivariance) {
  Sampler rng(41);
  for (auto alg : {heisenberg(1), engel()}) {
    auto m = HomogeneousMetric::hebisch_sikora(0.5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<GroupElement> E;
      for (int k = 0; k < 10; ++k) E.push_back(rng.box_element(alg, 1));
      auto x = rng.box_element(alg, 0.5);
      auto l = HorizontalLine::through(rng.box_element(alg, 1), rng.unit_vector(2));
      const double r = 3.0;
      auto base = beta_objective(m, l, E, x, r);

      const double lam = rng.uniform(0.3, 3);
      std::vector<GroupElement> dE;
      for (auto& z : E) dE.push_back(dilate(lam, z));
      auto dil = beta_objective(m, HorizontalLine(dilate(lam, l.base()), l.direction()), dE, dilate(lam, x), lam * r);
      EXPECT_NEAR(dil.value, base.value, 1e-9);

      auto g = rng.box_element(alg, 1);
      std::vector<GroupElement> gE;
      for (auto& z : E) gE.push_back(g * z);
      auto tr = beta_objective(m, HorizontalLine(g * l.base(), l.direction()), gE, g * x, r);
      EXPECT_NEAR(tr.value, base.value, 1e-9);
    }
  }
}

TEST(Beta, CollinearHorizontalIsZero) {
  Sampler rng(42);
  auto h = heisenberg(1);
  for (const auto& m : {HomogeneousMetric::infinity_unit(2), HomogeneousMetric::hebisch_sikora(0.5)}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto l = HorizontalLine::through(rng.box_element(h, 1), rng.unit_vector(2));
      auto E = collinear(l, 200, 1.0);
      auto rep = beta_hat(m, E, l.base(), 4.0);
      EXPECT_LT(rep.beta_hat, 1e-6);
      EXPECT_LT(rep.beta_classical, 1e-6);
      ASSERT_TRUE(rep.best_line.has_value());
    }
  }
}

TEST(Beta, ReportInvariants) {
  Sampler rng(43);
  for (auto alg : {heisenberg(1), engel()}) {
    auto m = HomogeneousMetric::infinity_unit(alg->step());
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<GroupElement> E;
      for (int k = 0; k < 12; ++k) E.push_back(rng.box_element(alg, 1));
      auto x = GroupElement::identity(alg);
      BetaConfig cfg;
      cfg.restarts = 3;
      auto rep = beta_hat(m, E, x, 1.5, cfg);
      EXPECT_GE(rep.beta_hat, rep.beta_classical - 1e-9);
      EXPECT_LE(rep.beta_hat, 2 * std::pow(alg->step(), 1.0 / (2 * alg->step())) + 1e-9);
      ASSERT_TRUE(rep.best_line.has_value());
      auto again = beta_objective(m, *rep.best_line, E, x, 1.5);
      for (std::size_t i = 0; i < rep.per_layer_sup.size(); ++i) {
        EXPECT_GE(rep.per_layer_sup[i], 0.0);
        EXPECT_NEAR(again.per_layer_sup[i], rep.per_layer_sup[i], 1e-10);
      }
      auto cl = beta_classical(m, E, x, 1.5, cfg, {*rep.best_line});
      EXPECT_LE(cl.value, rep.beta_hat + 1e-9);
    }
  }
}

TEST(Beta, EmptyBallIsDegenerate) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto rep = beta_hat(m, {GroupElement(h, {9, 9, 9})}, GroupElement::identity(h), 1.0);
  EXPECT_EQ(rep.beta_hat, 0.0);
  EXPECT_EQ(rep.in_ball, 0u);
  EXPECT_FALSE(rep.best_line.has_value());
}

TEST(Beta, SetMonotonicityAtFixedLine) {
  Sampler rng(44);
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::hebisch_sikora(0.5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<GroupElement> E;
    for (int k = 0; k < 8; ++k) E.push_back(rng.box_element(h, 0.5));
    auto o = GroupElement::identity(h);
    auto bigger = E;
    bigger.push_back(rng.box_element(h, 0.5));
    auto rep = beta_hat(m, bigger, o, 2.0);
    ASSERT_TRUE(rep.best_line.has_value());
    const double at_line = std::pow(beta_objective(m, *rep.best_line, E, o, 2.0).value, 0.25);
    EXPECT_LE(at_line, rep.beta_hat + 1e-9);
  }
}

TEST(Beta, ScaleConsistency) {
  Sampler rng(45);
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  std::vector<GroupElement> E;
  for (int k = 0; k < 15; ++k) E.push_back(rng.box_element(h, 1));
  auto x = GroupElement(h, {0.1, 0.2, 0.0});
  auto a = beta_hat(m, E, x, 1.5);
  std::vector<GroupElement> dE;
  for (auto& z : E) dE.push_back(dilate(4.0, z));
  auto b = beta_hat(m, dE, dilate(4.0, x), 6.0);
  EXPECT_NEAR(a.beta_hat, b.beta_hat, 1e-6);
}

TEST(Beta, MatchesGridOracleOnFixture) {
  auto h = heisenberg(1);
  auto o = GroupElement::identity(h);
  auto E = fixture(h);
  for (const auto& m : {HomogeneousMetric::infinity_unit(2), HomogeneousMetric::hebisch_sikora(1.0)}) {
    auto rep = beta_hat(m, E, o, 2.0);
    const double hat_oracle = grid_oracle(m, E, o, 2.0, false);
    const double cl_oracle = grid_oracle(m, E, o, 2.0, true);
    EXPECT_NEAR(rep.beta_hat, hat_oracle, 0.02 * hat_oracle);
    EXPECT_NEAR(rep.beta_classical, cl_oracle, 0.02 * cl_oracle);
  }
}

TEST(Beta, SubsampledOptimizationStaysExact) {
  Sampler rng(46);
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  std::vector<GroupElement> E;
  for (int k = 0; k < 400; ++k) E.push_back(rng.box_element(h, 1));
  BetaConfig cfg;
  cfg.restarts = 2;
  cfg.max_opt_points = 32;
  auto rep = beta_hat(m, E, GroupElement::identity(h), 2.0, cfg);
  ASSERT_TRUE(rep.best_line.has_value());
  auto again = beta_objective(m, *rep.best_line, E, GroupElement::identity(h), 2.0);
  EXPECT_NEAR(std::pow(again.value, 0.25), rep.beta_hat, 1e-10);
  EXPECT_GE(rep.beta_hat, rep.beta_classical - 1e-9);
}
