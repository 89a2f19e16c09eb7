#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sidle/baselines.hpp"
#include "sidle/errors.hpp"
#include "sidle/fuzzy.hpp"
#include "sidle/leach.hpp"
#include "support.hpp"

using namespace sidle;
using namespace sidle::testing;

namespace {

// Mamdani inference written out independently: piecewise-linear memberships
// evaluated directly, clipped output sets, centroid by fine midpoint
// integration.
double tri(double x, double a, double b, double c) {
  if (x < a || x > c) return 0.0;
  if (x <= b) return b == a ? 1.0 : (x - a) / (b - a);
  return c == b ? 1.0 : (c - x) / (c - b);
}

double oracle_chance(double e, double d, double c, const FuzzyRuleBase& rb) {
  const double raw[3] = {e, d, c};
  double mu[3][3];
  for (int i = 0; i < 3; ++i) {
    const FuzzyInput& in = rb.inputs[static_cast<std::size_t>(i)];
    const double x = raw[i] < in.min ? in.min : (raw[i] > in.max ? in.max : raw[i]);
    for (int s = 0; s < 3; ++s) {
      const Triangle& t = in.sets[static_cast<std::size_t>(s)];
      mu[i][s] = tri(x, t.a, t.b, t.c);
    }
  }
  double clip[kChanceLevels] = {};
  for (int ei = 0; ei < 3; ++ei)
    for (int di = 0; di < 3; ++di)
      for (int ci = 0; ci < 3; ++ci) {
        const double w = std::min(mu[0][ei], std::min(mu[1][di], mu[2][ci]));
        double& slot = clip[rb.rule(ei, di, ci)];
        slot = std::max(slot, w);
      }
  const int steps = 200000;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double y = (k + 0.5) * 100.0 / steps;
    double m = 0.0;
    for (std::size_t l = 0; l < kChanceLevels; ++l) {
      const Triangle& t = rb.outputs[l];
      m = std::max(m, std::min(clip[l], tri(y, t.a, t.b, t.c)));
    }
    num += y * m;
    den += m;
  }
  return den > 0 ? num / den : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- LEACH

TEST(LeachThreshold, Examples) {
  EXPECT_EQ(leach_threshold(0.05, 0, false), 0.0);
  EXPECT_EQ(leach_threshold(0.05, 7, false), 0.0);
  EXPECT_DOUBLE_EQ(leach_threshold(0.05, 0, true), 0.05);
  EXPECT_EQ(leach_threshold(0.05, 19, true), 1.0);
  EXPECT_EQ(leach_threshold(0.05, 39, true), 1.0);
  EXPECT_DOUBLE_EQ(leach_threshold(0.05, 20, true), 0.05);
  EXPECT_DOUBLE_EQ(leach_threshold(0.05, 10, true), 0.05 / (1 - 0.05 * 10));
}

TEST(LeachThreshold, RejectsBadP) {
  EXPECT_THROW((void)leach_threshold(0.0, 0, true), ConfigError);
  EXPECT_THROW((void)leach_threshold(1.5, 0, true), ConfigError);
  EXPECT_THROW((void)leach_threshold(-0.1, 0, true), ConfigError);
  EXPECT_EQ(leach_threshold(1.0, 0, true), 1.0);
  EXPECT_EQ(leach_epoch_length(0.05), 20u);
  EXPECT_EQ(leach_epoch_length(0.3), 4u);
}

TEST(LeachState, EveryNodeServesOncePerEpoch) {
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    LeachState st(100, 0.05);
    RngStream rng(seed, stream::kLeachThreshold);
    const std::vector<bool> alive(100, true);
    for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
      std::vector<int> served(100, 0);
      for (std::uint64_t r = epoch * 20; r < epoch * 20 + 20; ++r) {
        for (NodeId h : st.elect(r, alive, rng)) ++served[h.index()];
      }
      for (int s : served) EXPECT_EQ(s, 1);
    }
  }
}

TEST(LeachState, MeanHeadCount) {
  LeachState st(100, 0.05);
  RngStream rng(1, stream::kLeachThreshold);
  const std::vector<bool> alive(100, true);
  std::size_t total = 0;
  for (std::uint64_t r = 0; r < 200; ++r) total += st.elect(r, alive, rng).size();
  const double mean = static_cast<double>(total) / 200.0;
  EXPECT_GE(mean, 4.0);
  EXPECT_LE(mean, 6.0);
}

TEST(LeachState, DeadNodesNeverElected) {
  LeachState st(10, 0.5);
  RngStream rng(4, stream::kLeachThreshold);
  std::vector<bool> alive(10, true);
  alive[3] = false;
  for (std::uint64_t r = 0; r < 40; ++r) {
    for (NodeId h : st.elect(r, alive, rng)) EXPECT_NE(h, NodeId{3});
  }
}

TEST(LeachRun, LoneSurvivorStillReports) {
  ScenarioConfig cfg = one_cluster(5, 1);
  cfg.protocol = ProtocolKind::Leach;
  for (std::uint32_t n = 1; n < 7; ++n) cfg.failures.push_back({0, 0, NodeId{n}, {}});
  Simulation sim(cfg);
  sim.run();
  for (const MetricsSample& s : sim.series()) {
    EXPECT_EQ(s.alive_count, 1u);
    EXPECT_EQ(s.records_delivered, 1u) << "round " << s.round;
  }
}

TEST(LeachRun, MembersJoinTheStrongestHead) {
  ScenarioConfig cfg = scenario(3);
  cfg.protocol = ProtocolKind::Leach;
  Simulation sim(cfg);
  sim.run();
  const auto& leach = dynamic_cast<const LeachProtocol&>(sim.protocol());
  const auto& heads = leach.driver().heads();
  ASSERT_FALSE(heads.empty());
  for (const NodeInfo& n : sim.topology().nodes()) {
    if (std::find(heads.begin(), heads.end(), n.id) != heads.end()) continue;
    const NodeId j = leach.driver().joined(n.id);
    ASSERT_TRUE(j.valid());
    // Nearest head means strongest signal under the shared path-loss model.
    for (NodeId h : heads) {
      EXPECT_LE(sim.network().distance_between(n.id, j),
                sim.network().distance_between(n.id, h) + 1e-9);
    }
  }
}

// ---------------------------------------------------------------- FCA

TEST(FcaChance, MatchesIndependentInference) {
  FuzzyRuleBase rb = FuzzyRuleBase::defaults(20.0);
  // Fine sampling first, so only the integration error separates the two.
  rb.resolution = 100001;
  for (double e : {0.0, 0.1, 0.33, 0.5, 0.8, 1.0}) {
    for (double d : {0.0, 7.0, 20.0}) {
      for (double c : {0.0, 0.6, 1.0}) {
        EXPECT_NEAR(fca_chance(e, d, c, rb), oracle_chance(e, d, c, rb), 1e-3);
      }
    }
  }
  // The shipped resolution samples every 0.1 on the output axis.
  rb.resolution = 1001;
  for (double e : {0.0, 0.1, 0.33, 0.5, 0.8, 1.0}) {
    for (double d : {0.0, 4.0, 10.0, 17.0, 20.0, 25.0}) {
      for (double c : {0.0, 0.25, 0.6, 1.0}) {
        EXPECT_NEAR(fca_chance(e, d, c, rb), oracle_chance(e, d, c, rb), 0.1)
            << e << " " << d << " " << c;
      }
    }
  }
}

TEST(FcaChance, ExtremesGiveTheMaximum) {
  const FuzzyRuleBase rb = FuzzyRuleBase::defaults(20.0);
  const double top = fca_chance(1.0, 20.0, 1.0, rb);
  EXPECT_NEAR(top, oracle_chance(1.0, 20.0, 1.0, rb), 0.1);
  for (int e = 0; e <= 10; ++e)
    for (int d = 0; d <= 20; d += 2)
      for (int c = 0; c <= 10; ++c) {
        EXPECT_LE(fca_chance(e / 10.0, d, c / 10.0, rb), top + 1e-9);
      }
}

TEST(FcaChance, EmptyBatteryBelowMidpoint) {
  const FuzzyRuleBase rb = FuzzyRuleBase::defaults(20.0);
  for (int d = 0; d < 3; ++d)
    for (int c = 0; c < 3; ++c) EXPECT_LE(rb.rule(0, d, c), 2);
  for (int d = 0; d <= 20; ++d)
    for (int c = 0; c <= 10; ++c) EXPECT_LT(fca_chance(0.0, d, c / 10.0, rb), 50.0);
}

TEST(FcaChance, Deterministic) {
  const FuzzyRuleBase rb = FuzzyRuleBase::defaults(20.0);
  EXPECT_EQ(fca_chance(0.42, 7.0, 0.3, rb), fca_chance(0.42, 7.0, 0.3, rb));
}

TEST(FcaRules, ShippedFileMatchesDefaults) {
  const FuzzyRuleBase shipped = load_rule_base(source_path("configs/fca_rules.json"));
  const FuzzyRuleBase rb = FuzzyRuleBase::defaults(20.0);
  EXPECT_EQ(shipped.rules, rb.rules);
  EXPECT_EQ(rule_base_to_json(shipped), rule_base_to_json(rb));
  EXPECT_EQ(rule_base_to_json(rule_base_from_json(rule_base_to_json(rb))),
            rule_base_to_json(rb));
}

TEST(FcaRules, ValidationCatchesGaps) {
  FuzzyRuleBase rb = FuzzyRuleBase::defaults();
  rb.rules[5] = 7;
  EXPECT_THROW(rb.validate(), ConfigError);
  rb = FuzzyRuleBase::defaults();
  rb.inputs[0].sets[1] = Triangle{0.6, 0.7, 0.8};
  EXPECT_THROW(rb.validate(), ConfigError);
  EXPECT_THROW((void)rule_base_from_json("{]"), ConfigError);
}

TEST(FcaSelect, IsolatedNodeLeads) {
  std::vector<ChanceEntry> e{{NodeId{0}, {0, 0}, 10.0}, {NodeId{1}, {1000, 0}, 90.0}};
  EXPECT_EQ(fca_select_heads(e, 150.0), (std::vector<NodeId>{NodeId{0}, NodeId{1}}));
}

TEST(FcaSelect, StrictDominance) {
  std::vector<ChanceEntry> e{{NodeId{0}, {0, 0}, 40.0}, {NodeId{1}, {50, 0}, 60.0}};
  EXPECT_EQ(fca_select_heads(e, 150.0), std::vector<NodeId>{NodeId{1}});
}

TEST(FcaSelect, EqualChancesLowestId) {
  std::vector<ChanceEntry> e{{NodeId{4}, {0, 0}, 55.0},
                             {NodeId{2}, {30, 0}, 55.0},
                             {NodeId{9}, {0, 30}, 55.0}};
  EXPECT_EQ(fca_select_heads(e, 150.0), std::vector<NodeId>{NodeId{2}});
}

TEST(FcaRun, HeadsAreNotWithinRangeOfEachOther) {
  ScenarioConfig cfg = scenario(6);
  cfg.protocol = ProtocolKind::Fca;
  Simulation sim(cfg);
  for (int r = 0; r < 6; ++r) {
    (void)sim.step();
    const auto& fca = dynamic_cast<const FcaProtocol&>(sim.protocol());
    const auto& heads = fca.driver().heads();
    EXPECT_FALSE(heads.empty());
    for (std::size_t i = 0; i < heads.size(); ++i)
      for (std::size_t j = i + 1; j < heads.size(); ++j) {
        EXPECT_GT(sim.network().distance_between(heads[i], heads[j]),
                  cfg.fca_cluster_range_m);
      }
  }
}
