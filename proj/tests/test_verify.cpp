#include "carnot/verify.hpp"

#include <gtest/gtest.h>

using namespace carnot;

namespace {

VerifyOptions small(std::size_t n, std::uint64_t seed = 3) {
  VerifyOptions o;
  o.samples = n;
  o.seed = seed;
  return o;
}

void expect_same(const InequalityReport& a, const InequalityReport& b) {
  EXPECT_EQ(a.lemma, b.lemma);
  EXPECT_EQ(a.max, b.max);
  EXPECT_EQ(a.p99, b.p99);
  EXPECT_EQ(a.p999, b.p999);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_EQ(a.degenerate, b.degenerate);
  EXPECT_EQ(a.extras, b.extras);
}

void expect_sane(const InequalityReport& r) {
  EXPECT_GE(r.max, 0.0);
  EXPECT_LE(r.p99, r.p999);
  EXPECT_LE(r.p999, r.max);
  EXPECT_EQ(r.fitted_constant, r.max);
  EXPECT_TRUE(std::isfinite(r.max));
  EXPECT_EQ(r.hard_violations, 0u);
  EXPECT_LT(static_cast<double>(r.degenerate), 0.05 * static_cast<double>(r.samples));
}

}  // namespace

TEST(Verify, ReportStatisticsAndReference) {
  auto h = heisenberg(1);
  auto o = small(2000);
  auto base = check_bch_bound(h, 0.4, o);
  EXPECT_EQ(base.samples, 2000u);
  EXPECT_EQ(base.seed, 3u);
  EXPECT_EQ(base.violations, 0u);
  EXPECT_TRUE(std::isinf(base.reference_constant));

  o.reference = base.p99;
  auto at_p99 = check_bch_bound(h, 0.4, o);
  EXPECT_EQ(at_p99.reference_constant, base.p99);
  EXPECT_LE(at_p99.violations, 20u);
  o.reference = base.max;
  EXPECT_EQ(check_bch_bound(h, 0.4, o).violations, 0u);
  o.reference = 0.0;
  EXPECT_EQ(check_bch_bound(h, 0.4, o).violations, 2000u - base.degenerate);
}

TEST(Verify, BchBoundClosedForm) {
  GroupElement x(heisenberg(1), {0.7, -0.2, 0.4});
  GroupElement zero = GroupElement::identity(heisenberg(1));
  EXPECT_EQ(euclidean_norm(bch_polynomial(2, x, zero)), 0.0);

  for (double eta : {0.05, 0.5, 0.9}) {
    auto r = check_bch_bound(heisenberg(1), eta, small(3000));
    expect_sane(r);
    EXPECT_LE(r.max, 0.5 + 1e-9);
    EXPECT_GT(r.max, 0.4);
  }
  EXPECT_EQ(check_bch_bound(euclidean(3), 0.5, small(100)).max, 0.0);
  expect_sane(check_bch_bound(engel(), 0.5, small(500)));
  EXPECT_THROW(check_bch_bound(heisenberg(1), 1.0, small(10)), InvalidArgument);
  EXPECT_THROW(check_bch_bound(heisenberg(1), 0.0, small(10)), InvalidArgument);
}

TEST(Verify, CloseLinesDilationConsistency) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  auto one = check_close_lines(m, h, 0.1, 1.0, small(400));
  auto two = check_close_lines(m, h, 0.1, 2.0, small(400));
  expect_sane(one);
  EXPECT_NEAR(two.max, one.max, 1e-9 * one.max);
  EXPECT_NEAR(two.p99, one.p99, 1e-9 * one.p99);

  // g = h, u = v: the two lines coincide
  GroupElement g(h, {0.3, 0.1, -0.5});
  std::vector<double> u{0.6, 0.8};
  for (double t : {0.0, 0.5, 1.0}) {
    std::vector<double> ut{u[0] * t, u[1] * t};
    EXPECT_EQ(distance(m, g * GroupElement::horizontal(h, ut), g * GroupElement::horizontal(h, ut)), 0.0);
  }
  EXPECT_THROW(check_close_lines(m, h, 0.1, 0.0, small(10)), InvalidArgument);
}

TEST(Verify, BallContainment) {
  for (auto alg : {heisenberg(1), engel()}) {
    auto m = HomogeneousMetric::infinity_unit(alg->step());
    auto bb = check_beta_balls(m, alg, small(500));
    auto eb = check_euc_ball(m, alg, 0.1, small(300));
    expect_sane(bb);
    expect_sane(eb);
    EXPECT_GT(bb.max, 0.0);
    EXPECT_GT(eb.max, 0.0);
  }
  EXPECT_THROW(check_euc_ball(HomogeneousMetric::infinity_unit(2), heisenberg(1), 1.5, small(10)),
               InvalidArgument);
}

TEST(Verify, PiNhAndNonhorizontal) {
  auto h = heisenberg(1);
  auto m = HomogeneousMetric::infinity_unit(2);
  GroupElement flat(h, {0.3, -0.4, 0.0});
  EXPECT_EQ(nh(m, flat), 0.0);
  EXPECT_DOUBLE_EQ(norm(m, flat) / (detail::quotient_norm(m, flat, 1) + nh(m, flat)), 1.0);

  auto pi = check_pi_nh(m, h, small(1000));
  expect_sane(pi);
  EXPECT_LE(pi.max, 1.0 + 1e-12);
  auto nonh = check_nonhorizontal(m, h, small(300));
  expect_sane(nonh);
  expect_sane(check_nonhorizontal(HomogeneousMetric::hebisch_sikora(0.5), engel(), small(100)));
}

TEST(Verify, CurvatureChecks) {
  auto h = heisenberg(1);
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  auto three = check_curvature(hs, h, 0.2, 3, small(300));
  auto four = check_curvature(hs, h, 0.2, 4, small(60));
  auto five = check_curvature(hs, h, 0.2, 5, small(60));
  for (const auto* r : {&three, &four, &five}) {
    expect_sane(*r);
    EXPECT_GT(r->max, 0.0);
  }
  EXPECT_EQ(four.lemma, "curvature-4");

  // collinear horizontal equispaced points have no triangle excess
  std::vector<double> dir{1.0, 0.0};
  HorizontalLine L(GroupElement(h, {0.2, 0.1, 0.3}), dir);
  std::vector<GroupElement> p;
  for (int k = 0; k < 4; ++k) p.push_back(line_point(L, 0.25 * k));
  const double excess = distance(hs, p[0], p[1]) + distance(hs, p[1], p[2]) + distance(hs, p[2], p[3]) -
                        distance(hs, p[0], p[3]);
  EXPECT_LT(std::abs(excess), 1e-12);

  EXPECT_THROW(check_curvature(HomogeneousMetric::infinity_unit(2), h, 0.2, 3, small(5)), InvalidArgument);
  EXPECT_THROW(check_curvature(hs, h, 0.2, 6, small(5)), InvalidArgument);
  EXPECT_THROW(check_curvature(hs, h, 1.0, 4, small(5)), InvalidArgument);
}

TEST(Verify, RejectionBudget) {
  auto h = heisenberg(1);
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  auto o = small(5);
  o.max_attempts = 0;
  EXPECT_THROW(check_proj_order(hs, h, 0.5, 0.01, o), NumericalFailure);
  o.max_attempts = 200;
  EXPECT_THROW(check_curvature(hs, h, 0.999, 5, o), NumericalFailure);
}

TEST(Verify, HsTaylorQuadraticOrder) {
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  for (auto alg : {heisenberg(1), engel()}) {
    auto r = check_hs_taylor(hs, alg, 0.3, 0.05, small(2000));
    expect_sane(r);
    EXPECT_GT(r.max, 0.0);
    EXPECT_EQ(r.extra("order_outside_20pct"), 0.0);
    EXPECT_GT(r.extra("order_ratio_min"), 3.2);
    EXPECT_LT(r.extra("order_ratio_max"), 4.8);
  }
  // adding a top-layer coordinate strictly increases the gauge
  auto h = heisenberg(1);
  GroupElement x(h, {0.5, 0.2, 0.0}), xy(h, {0.5, 0.2, 1e-3});
  EXPECT_GT(norm(hs, xy), norm(hs, x));
  EXPECT_THROW(check_hs_taylor(hs, euclidean(2), 0.3, 0.05, small(5)), InvalidArgument);
  EXPECT_THROW(check_hs_taylor(hs, h, 0.3, 0.0, small(5)), InvalidArgument);
  EXPECT_THROW(check_hs_taylor(HomogeneousMetric::infinity_unit(2), h, 0.3, 0.05, small(5)), InvalidArgument);
}

TEST(Verify, SufficiencyTriple) {
  auto h = heisenberg(1);
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  auto r = check_sufficiency_triple(hs, h, 0.3, 16, small(300));
  expect_sane(r);
  EXPECT_GT(r.max, 0.0);
  EXPECT_EQ(r.extra("corollary_samples"), 16.0);
  EXPECT_EQ(r.extra("corollary_optimizer_gaps"), 0.0);
  EXPECT_GT(r.extra("corollary_fitted_constant"), 0.0);
  EXPECT_THROW(r.extra("missing"), InvalidArgument);
}

TEST(Verify, ProjOrderViolationRate) {
  auto h = heisenberg(1);
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  auto r = check_proj_order(hs, h, 0.5, 0.01, small(2000));
  expect_sane(r);
  EXPECT_EQ(r.reference_constant, 1.0);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.extra("violation_rate"), 0.0);
  EXPECT_LE(r.max, 1.0);
}

TEST(Verify, DeterministicAcrossRunsAndThreads) {
  auto h = heisenberg(1);
  auto hs = HomogeneousMetric::hebisch_sikora(1.0);
  auto o = small(200, 11);
  auto a = check_curvature(hs, h, 0.2, 3, o);
  auto b = check_curvature(hs, h, 0.2, 3, o);
  o.threads = 4;
  auto c = check_curvature(hs, h, 0.2, 3, o);
  expect_same(a, b);
  expect_same(a, c);

  auto d = check_hs_taylor(hs, h, 0.3, 0.05, small(300, 11));
  o.samples = 300;
  auto e = check_hs_taylor(hs, h, 0.3, 0.05, o);
  expect_same(d, e);

  auto other = check_curvature(hs, h, 0.2, 3, small(200, 12));
  EXPECT_NE(other.max, a.max);
}
