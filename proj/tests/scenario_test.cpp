#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace navstruct {
namespace {

using testing::make_scenario;
using testing::ping_pong;

TEST(LifetimeTail, TruncatedPoissonValues) {
  auto life = build_lifetime_tail(2.0, 4);
  // Frozen from direct summation of mu^m e^-mu / m! for m = t..4.
  EXPECT_NEAR(life.tail(1), 0.8120116994196762, 1e-15);
  EXPECT_NEAR(life.tail(2), 0.5413411329464508, 1e-15);
  EXPECT_NEAR(life.tail(3), 0.2706705664732254, 1e-15);
  EXPECT_NEAR(life.tail(4), 0.0902235221577418, 1e-15);
  EXPECT_EQ(life.tail(5), 0.0);
  EXPECT_EQ(life.tail(100), 0.0);
}

TEST(LifetimeTail, SingleTerm) {
  auto life = build_lifetime_tail(1.0, 1);
  EXPECT_NEAR(life.tail(1), std::exp(-1.0), 1e-15);
  EXPECT_EQ(life.tail(2), 0.0);
}

TEST(LifetimeTail, RejectsBadParameters) {
  EXPECT_THROW(build_lifetime_tail(0.0, 3), InvalidInput);
  EXPECT_THROW(build_lifetime_tail(-1.0, 3), InvalidInput);
  EXPECT_THROW(build_lifetime_tail(1.0, 0), InvalidInput);
}

TEST(LifetimeTail, MonotoneAndStableForLargeMu) {
  auto life = build_lifetime_tail(50.0, 200);
  for (int t = 0; t <= 201; ++t) {
    const double g = life.tail(t);
    ASSERT_TRUE(std::isfinite(g));
    ASSERT_GE(g, 0.0);
    ASSERT_LE(g, 1.0);
    ASSERT_LE(life.tail(t + 1), g);
  }
  EXPECT_EQ(life.tail(201), 0.0);
  EXPECT_NEAR(life.tail(1), 1.0, 1e-12);
}

TEST(Validation, WellFormedChainIsClean) {
  auto sc = make_scenario({{1}, {0}}, 0, 1.0, 2);
  EXPECT_TRUE(validate_navigation_model(sc.graph, sc.nav).empty());
}

TEST(Validation, UnnormalizedRowIsReported) {
  auto sc = make_scenario({{1, 2}, {0, 2}, {0, 1}}, 0, 1.0, 2);
  sc.nav.set_row(0, 1, {{0, 0.5}, {2, 0.4}});
  auto report = validate_navigation_model(sc.graph, sc.nav);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, Violation::Kind::normalization);
  EXPECT_EQ(report[0].prev, 0);
  EXPECT_EQ(report[0].cur, 1);
}

TEST(Validation, OutOfRangeNeighborIsReported) {
  MediaGraph g({{1}, {2}}, 0);
  NavigationModel nav;
  nav.set_start_row({{1, 1.0}});
  auto report = validate_navigation_model(g, nav);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, Violation::Kind::index);
}

TEST(Validation, MissingRowIsReported) {
  auto sc = make_scenario({{1}, {0}}, 0, 1.0, 2);
  NavigationModel nav;
  nav.set_start_row({{1, 1.0}});
  auto report = validate_navigation_model(sc.graph, nav);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, Violation::Kind::missing_row);
}

TEST(AggregateSwitch, PingPongMassEqualsTailSum) {
  auto sc = ping_pong(2.0, 4);
  auto q = aggregate_switch_probabilities(sc);
  EXPECT_NEAR(q.total(), 1.353352832366127, 1e-12);
  EXPECT_NEAR(q.total(), sc.lifetime.tail(1) + sc.lifetime.tail(2), 1e-12);
}

TEST(AggregateSwitch, FractionalMuUsesSingleTerm) {
  auto sc = make_scenario({{1, 2}, {0, 2}, {0, 1}}, 0, 0.6, 3);
  auto q = aggregate_switch_probabilities(sc);
  // One propagation step from the start states, weighted by g(1).
  const double g1 = sc.lifetime.tail(1);
  EXPECT_NEAR(q.total(), g1, 1e-12);
  // From (0,1) the user goes to 0 or 2 with 1/2 each; same from (0,2).
  EXPECT_NEAR(q.at(1, 0), 0.25 * g1, 1e-12);
  EXPECT_NEAR(q.at(1, 2), 0.25 * g1, 1e-12);
  EXPECT_NEAR(q.at(2, 1), 0.25 * g1, 1e-12);
  EXPECT_EQ(q.at(0, 1), 0.0);
}

TEST(AggregateSwitch, IsolatedMduHasNoEvents) {
  auto sc = make_scenario({{}}, 0, 3.0, 5);
  auto q = aggregate_switch_probabilities(sc);
  EXPECT_EQ(q.nonzeros(), 0u);
}

TEST(AggregateSwitch, MassConservationOnRandomScenarios) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = testing::random_instance(seed);
    auto q = aggregate_switch_probabilities(inst.scenario);
    double expected = 0.0;
    const auto& life = inst.scenario.lifetime;
    for (int t = 1; t <= std::min(life.horizon(), life.t_max()); ++t) expected += life.tail(t);
    EXPECT_NEAR(q.total(), expected, 1e-6) << "seed " << seed;
  }
}

}  // namespace
}  // namespace navstruct
