#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sidle/errors.hpp"
#include "sidle/event_queue.hpp"
#include "sidle/network.hpp"
#include "sidle/radio.hpp"
#include "sidle/rng.hpp"

using namespace sidle;

namespace {

TimerEvent tag(int t) { return TimerEvent{NodeId{}, t, 0}; }

int tag_of(const Event& e) { return std::get<TimerEvent>(e.payload).tag; }

Topology line_of(const std::vector<double>& xs) {
  std::vector<NodeInfo> nodes;
  Cell cell;
  cell.id = CellId{0};
  cell.cluster_id = ClusterId{0};
  for (std::uint32_t i = 0; i < xs.size(); ++i) {
    nodes.push_back({NodeId{i}, {xs[i], 0.0}, HardwareClass::Primitive, CellId{0},
                     ClusterId{0}});
    cell.member_ids.push_back(NodeId{i});
  }
  return Topology(100.0, std::move(nodes), {cell}, {}, Position{0, 5000});
}

struct Bench {
  explicit Bench(const std::vector<double>& xs, double loss = 0.0)
      : topo(line_of(xs)),
        ledger(std::vector<Battery>(xs.size(), make_battery(1.0)), true),
        trace(true),
        net(topo, params(loss), ledger, queue, trace, 11) {
    for (const NodeInfo& n : topo.nodes()) net.set_listening(n.id, {net.cell_channel(n.id)});
  }
  static NetworkParams params(double loss) {
    NetworkParams p;
    p.loss_probability = loss;
    return p;
  }
  Message to(std::uint32_t src, std::uint32_t dst) const {
    Message m;
    m.src = NodeId{src};
    m.dst = NodeId{dst};
    m.channel = net.cell_channel(m.dst);
    m.code = net.code_of(m.dst);
    m.kind = MessageKind::DataPacket;
    m.payload_size = 64;
    return m;
  }
  Topology topo;
  EnergyLedger ledger;
  EventQueue queue;
  Trace trace;
  Network net;
};

}  // namespace

TEST(EventQueue, NowFiresBeforeLater) {
  EventQueue q;
  q.schedule(10, tag(2));
  q.schedule(0, tag(1));
  EXPECT_EQ(tag_of(*q.pop()), 1);
  EXPECT_EQ(tag_of(*q.pop()), 2);
  EXPECT_EQ(q.now(), 10);
  EXPECT_FALSE(q.pop());
}

TEST(EventQueue, SameTimeIsFifo) {
  EventQueue q;
  q.schedule(5, tag('A'));
  q.schedule(5, tag('B'));
  EXPECT_EQ(tag_of(*q.pop()), 'A');
  EXPECT_EQ(tag_of(*q.pop()), 'B');
}

TEST(EventQueue, PastTimeIsContractViolation) {
  EventQueue q;
  q.schedule(100, tag(1));
  (void)q.pop();
  EXPECT_THROW(q.schedule(99, tag(2)), ContractViolation);
  EXPECT_NO_THROW(q.schedule(100, tag(3)));
}

TEST(EventQueue, MatchesSortOracle) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<SimTime> t(0, 200);
  EventQueue q;
  std::vector<std::pair<SimTime, int>> want;
  for (int i = 0; i < 1000; ++i) {
    const SimTime at = t(gen);
    q.schedule(at, tag(i));
    want.emplace_back(at, i);  // i doubles as the schedule order
  }
  std::sort(want.begin(), want.end());
  for (const auto& [at, i] : want) {
    const auto e = q.pop();
    ASSERT_TRUE(e);
    EXPECT_EQ(e->fire_time, at);
    EXPECT_EQ(tag_of(*e), i);
  }
  EXPECT_TRUE(q.empty());
}

TEST(Rssi, ReferenceDistance) {
  const PathLossParams p;
  EXPECT_DOUBLE_EQ(rssi_at_distance(1.0, p), p.p0_dbm);
  EXPECT_DOUBLE_EQ(rssi({0, 0}, {0, 0}, p), p.p0_dbm);
}

TEST(Rssi, TenMetres) {
  PathLossParams p;
  p.p0_dbm = -40.0;
  p.exponent = 2.7;
  EXPECT_NEAR(rssi({0, 0}, {6, 8}, p), -67.0, 1e-12);
}

TEST(Rssi, DecreasesWithDistance) {
  const PathLossParams p;
  EXPECT_GT(rssi_at_distance(5.0, p), rssi_at_distance(5.5, p));
}

TEST(NormalizedSs, Levels) {
  const PathLossParams p;  // -100 .. -40
  EXPECT_EQ(normalized_ss(p.p0_dbm, p), 10);
  EXPECT_EQ(normalized_ss(p.sensitivity_dbm, p), 0);
  EXPECT_EQ(normalized_ss(-120.0, p), 0);
  EXPECT_EQ(normalized_ss(-70.0, p), 5);
  EXPECT_EQ(normalized_ss(-10.0, p), 10);
}

TEST(LinkVerdict, RangeAndLoss) {
  const RadioProfile r;
  EXPECT_EQ(link_verdict({0, 0}, {150, 0}, r.low, 0.0, 0.5), DeliveryOutcome::Delivered);
  EXPECT_EQ(link_verdict({0, 0}, {250, 0}, r.low, 0.0, 0.5), DeliveryOutcome::OutOfRange);
  EXPECT_EQ(link_verdict({0, 0}, {250, 0}, r.boosted, 0.0, 0.5), DeliveryOutcome::Delivered);
  for (double draw : {0.0, 0.3, 0.999999}) {
    EXPECT_EQ(link_verdict({0, 0}, {10, 0}, r.low, 1.0, draw), DeliveryOutcome::Lost);
  }
}

TEST(Network, DeliversInsideLowRange) {
  Bench b({0.0, 150.0, 250.0});
  EXPECT_EQ(b.net.send(b.to(0, 1)), DeliveryOutcome::Delivered);
  EXPECT_EQ(b.net.send(b.to(0, 2)), DeliveryOutcome::OutOfRange);
  const auto e = b.queue.pop();
  ASSERT_TRUE(e);
  EXPECT_EQ(e->fire_time, b.net.params().latency_ms);
  const auto& arrival = std::get<ArrivalEvent>(e->payload);
  EXPECT_EQ(arrival.receiver, NodeId{1});
  EXPECT_TRUE(b.queue.empty());

  // Sender pays for both attempts; the receiver pays only on acceptance.
  const RadioCostModel& c = b.net.params().cost;
  const Energy spent = b.ledger.drained(NodeId{0});
  EXPECT_EQ(spent, Energy::from_joules(tx_cost(c, 64, 150.0)) +
                       Energy::from_joules(tx_cost(c, 64, 250.0)));
  EXPECT_EQ(b.ledger.drained(NodeId{1}).picojoules(), 0);
  EXPECT_TRUE(b.net.accept(arrival));
  EXPECT_EQ(b.ledger.drained(NodeId{1}), Energy::from_joules(rx_cost(c, 64)));
}

TEST(Network, TotalLossDropsEverything) {
  Bench b({0.0, 20.0}, 1.0);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(b.net.send(b.to(0, 1)), DeliveryOutcome::Lost);
  EXPECT_TRUE(b.queue.empty());
}

TEST(Network, DeadReceiverCostsSenderOnly) {
  Bench b({0.0, 20.0});
  b.net.kill(NodeId{1}, "test");
  EXPECT_EQ(b.net.send(b.to(0, 1)), DeliveryOutcome::ReceiverDead);
  EXPECT_GT(b.ledger.drained(NodeId{0}).picojoules(), 0);
  EXPECT_EQ(b.ledger.drained(NodeId{1}).picojoules(), 0);
  EXPECT_TRUE(b.queue.empty());
}

TEST(Network, DeadSenderEmitsNothing) {
  Bench b({0.0, 20.0});
  b.net.kill(NodeId{0}, "test");
  const std::size_t rows = b.trace.records().size();
  EXPECT_EQ(b.net.send(b.to(0, 1)), DeliveryOutcome::SenderDead);
  EXPECT_TRUE(b.queue.empty());
  EXPECT_EQ(b.ledger.drained(NodeId{0}).picojoules(), 0);
  EXPECT_EQ(b.trace.records().size(), rows);
}

TEST(Network, WrongChannelIsInvisible) {
  Bench b({0.0, 20.0});
  Message m = b.to(0, 1);
  m.channel += 1;
  EXPECT_EQ(b.net.send(m), DeliveryOutcome::NotListening);
  m = b.to(0, 1);
  m.code += 1;
  EXPECT_EQ(b.net.send(m), DeliveryOutcome::NotListening);
}

TEST(Network, ArrivalNeverBeforeLatency) {
  Bench b({0.0, 50.0, 100.0, 150.0});
  Message m = b.to(0, 1);
  m.dst = NodeId{};
  m.code = kBroadcastCode;
  const std::size_t n = b.net.broadcast(m);
  EXPECT_EQ(n, 3u);
  while (auto e = b.queue.pop()) EXPECT_GE(e->fire_time, b.net.params().latency_ms);
}

TEST(Rng, LabelledStreamsAreReproducible) {
  RngStream a(5, stream::kElectionDelay), b(5, stream::kElectionDelay);
  RngStream c(5, stream::kLoss), d(6, stream::kElectionDelay);
  bool differs_label = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs_label |= x != c.next_u64();
    differs_seed |= x != d.next_u64();
  }
  EXPECT_TRUE(differs_label);
  EXPECT_TRUE(differs_seed);
}

TEST(Rng, UniformIntBounds) {
  RngStream r(1, "bounds");
  for (int i = 0; i < 10000; ++i) {
    const auto v = r.uniform_int(-3, 3);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 3);
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(r.uniform_int(4, 4), 4);
  EXPECT_THROW((void)r.uniform_int(2, 1), ContractViolation);
}
