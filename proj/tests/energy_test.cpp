#include <gtest/gtest.h>

#include <random>

#include "sidle/energy.hpp"
#include "sidle/errors.hpp"

using namespace sidle;

namespace {

Battery with_residual(double capacity_j, double residual_j, double rate = 0.0) {
  Battery b = make_battery(capacity_j, rate);
  b.residual = Energy::from_joules(residual_j);
  return b;
}

}  // namespace

TEST(TxCost, EmptyPayloadIsFree) {
  const RadioCostModel m;
  EXPECT_EQ(tx_cost(m, 0, 0.0), 0.0);
  EXPECT_EQ(tx_cost(m, 0, 500.0), 0.0);
}

TEST(TxCost, ZeroDistanceIsElectronicsOnly) {
  const RadioCostModel m;
  EXPECT_DOUBLE_EQ(tx_cost(m, 250, 0.0), 2000.0 * m.electronics_j_per_bit);
}

TEST(TxCost, AmplifierTermIsQuadratic) {
  const RadioCostModel m;
  const double bits = 8.0 * 100;
  const double base = bits * m.electronics_j_per_bit;
  for (double d : {10.0, 37.5, 120.0}) {
    const double amp1 = tx_cost(m, 100, d) - base;
    const double amp2 = tx_cost(m, 100, 2 * d) - base;
    EXPECT_NEAR(amp1, bits * m.amplifier_j_per_bit_m2 * d * d, 1e-18);
    EXPECT_NEAR(amp2 / amp1, 4.0, 1e-9);
  }
}

TEST(TxCost, NegativeDistanceRejected) {
  EXPECT_THROW((void)tx_cost(RadioCostModel{}, 10, -1.0), ContractViolation);
}

TEST(RxCost, PerBit) {
  const RadioCostModel m;
  EXPECT_DOUBLE_EQ(rx_cost(m, 184), 8.0 * 184 * m.rx_j_per_bit);
}

TEST(Drain, Subtracts) {
  Battery b = make_battery(5.0);
  EXPECT_EQ(drain(b, 2.0), DrainOutcome::Alive);
  EXPECT_EQ(b.residual, Energy::from_joules(3.0));
}

TEST(Drain, ExactExhaustion) {
  Battery b = with_residual(5.0, 1.0);
  EXPECT_EQ(drain(b, 1.0), DrainOutcome::Dead);
  EXPECT_EQ(b.residual.picojoules(), 0);
}

TEST(Drain, ClampsAtZero) {
  Battery b = with_residual(5.0, 1.0);
  EXPECT_EQ(drain(b, 5.0), DrainOutcome::Dead);
  EXPECT_EQ(b.residual.picojoules(), 0);
}

TEST(Drain, NegativeAmountRejected) {
  Battery b = make_battery(5.0);
  EXPECT_THROW(drain(b, -0.1), ContractViolation);
  EXPECT_THROW(drain(b, Energy::from_picojoules(-1)), ContractViolation);
}

TEST(Harvest, DisabledAddsNothing) {
  Battery b = with_residual(5.0, 1.0, 0.0);
  EXPECT_EQ(harvest(b, 1000.0, 1.0).picojoules(), 0);
}

TEST(Harvest, FullBatteryAddsNothing) {
  Battery b = make_battery(5.0, 0.01);
  EXPECT_EQ(harvest(b, 1e6, 1.0).picojoules(), 0);
  EXPECT_EQ(b.residual, b.capacity);
}

TEST(Harvest, RateTimesTime) {
  Battery b = with_residual(5.0, 2.0, 0.01);
  const Energy added = harvest(b, 100.0, 1.0);
  EXPECT_EQ(added, Energy::from_joules(1.0));
  EXPECT_EQ(b.residual, Energy::from_joules(3.0));
}

TEST(Harvest, ClampsToHeadroom) {
  Battery b = with_residual(5.0, 4.5, 0.01);
  EXPECT_EQ(harvest(b, 100.0, 1.0), Energy::from_joules(0.5));
  EXPECT_EQ(b.residual, b.capacity);
}

TEST(NormalizedResidual, Levels) {
  EXPECT_EQ(normalized_residual(make_battery(5.0)), 10);
  EXPECT_EQ(normalized_residual(with_residual(5.0, 0.0)), 0);
  EXPECT_EQ(normalized_residual(with_residual(5.0, 0.55 * 5.0)), 5);
  EXPECT_EQ(normalized_residual(with_residual(5.0, 0.0999 * 5.0)), 0);
  EXPECT_EQ(normalized_residual(with_residual(5.0, 0.9999 * 5.0)), 9);
}

TEST(Ledger, ClosesUnderRandomTraffic) {
  std::vector<Battery> bs;
  for (int i = 0; i < 6; ++i) bs.push_back(make_battery(0.5 + i * 0.1, 0.002));
  EnergyLedger ledger(bs, true);
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> who(0, 5);
  std::uniform_real_distribution<double> amt(0.0, 0.01);
  for (SimTime t = 0; t < 5000; ++t) {
    const NodeId n{static_cast<std::uint32_t>(who(gen))};
    if (t % 7 == 0) {
      (void)ledger.harvest(n, t, 3.0, amt(gen) * 100);
    } else {
      (void)ledger.drain(n, t, Energy::from_joules(amt(gen)), EnergyCause::Tx);
    }
  }
  std::vector<std::int64_t> sum(6, 0);
  for (const AuditEntry& e : ledger.audit()) sum[e.node.index()] += e.delta_pj;
  for (std::uint32_t i = 0; i < 6; ++i) {
    const NodeId n{i};
    const Energy closed = ledger.initial(n) + ledger.harvested(n) - ledger.drained(n);
    EXPECT_EQ(closed, ledger.battery(n).residual);
    EXPECT_EQ(ledger.initial(n).picojoules() + sum[i],
              ledger.battery(n).residual.picojoules());
    EXPECT_GE(ledger.battery(n).residual.picojoules(), 0);
  }
}

TEST(Ledger, AuditCsvHeader) {
  EnergyLedger ledger({make_battery(1.0)}, true);
  (void)ledger.drain(NodeId{0}, 5, Energy::from_joules(0.25), EnergyCause::Cpu);
  const std::string csv = ledger.audit_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "node_id,time,delta_j,cause");
  EXPECT_NE(csv.find("0,5,-0.250000000000,cpu"), std::string::npos) << csv;
}
