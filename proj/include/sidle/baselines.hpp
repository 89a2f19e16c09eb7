#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sidle/aggregate.hpp"
#include "sidle/fuzzy.hpp"
#include "sidle/leach.hpp"
#include "sidle/protocol.hpp"

namespace sidle {

struct BaselineSetup {
  PacketFormat format;
  DutyCostModel duty;
  FrameTiming timing;
  std::uint64_t seed = 1;
};

// One cluster-head round after the heads are known: heads advertise, the
// others join the strongest advert, heads hand out TDMA slots, members
// report once each, heads aggregate and uplink straight to the base
// station. Nodes that hear no advert send their own record to the base.
class ClusterRoundDriver {
 public:
  ClusterRoundDriver(const Topology& topology, BaselineSetup setup);

  void start(Network& net, std::uint64_t round, std::vector<NodeId> heads);
  // False when the event does not belong to the driver.
  bool on_timer(Network& net, const TimerEvent& timer);
  bool on_arrival(Network& net, const ArrivalEvent& arrival);

  [[nodiscard]] const std::vector<NodeId>& heads() const { return heads_; }
  // Cluster head each node joined this round, invalid for heads and loners.
  [[nodiscard]] NodeId joined(NodeId node) const { return joined_[node.index()]; }
  RoundReport take_report();

  static constexpr int kTagBase = 100;

 private:
  enum Tag : int { kJoin = kTagBase, kSchedule, kReport, kDirect, kCollect };

  [[nodiscard]] bool is_head(NodeId n) const;

  const Topology& topology_;
  BaselineSetup setup_;
  SensorModel sensors_;
  std::uint64_t round_ = 0;
  SimTime start_ = 0;
  std::vector<NodeId> heads_;
  // Per node: best advert heard this round as (rssi, head).
  std::vector<std::optional<std::pair<double, NodeId>>> best_advert_;
  std::vector<NodeId> joined_;
  std::map<NodeId, std::vector<NodeId>> members_;
  std::map<NodeId, std::vector<SensorReading>> collected_;
  RoundReport report_;
};

struct LeachParams {
  double p = 0.05;

  void validate() const;
};

class LeachProtocol final : public Protocol {
 public:
  LeachProtocol(Network& net, LeachParams params, BaselineSetup setup);

  [[nodiscard]] std::string_view name() const override { return "leach"; }
  void begin_round(Network& net, std::uint64_t round) override;
  void on_timer(Network& net, const TimerEvent& timer) override;
  void on_arrival(Network& net, const ArrivalEvent& arrival) override;
  RoundReport take_report() override;

  [[nodiscard]] const LeachState& state() const { return state_; }
  [[nodiscard]] const ClusterRoundDriver& driver() const { return driver_; }

 private:
  LeachParams params_;
  BaselineSetup setup_;
  LeachState state_;
  RngStream rng_;
  ClusterRoundDriver driver_;
  std::uint64_t elections_ = 0;
};

struct ChanceEntry {
  NodeId id;
  Position position;
  double chance = 0.0;
};

// Strict local maxima of chance within range_m, equal chances going to the
// lower id.
[[nodiscard]] std::vector<NodeId> fca_select_heads(std::span<const ChanceEntry> entries,
                                                   double range_m);

struct FcaParams {
  double cluster_range_m = 150.0;
  FuzzyRuleBase rules = FuzzyRuleBase::defaults();

  void validate() const;
};

class FcaProtocol final : public Protocol {
 public:
  FcaProtocol(Network& net, FcaParams params, BaselineSetup setup);

  [[nodiscard]] std::string_view name() const override { return "fca"; }
  void begin_round(Network& net, std::uint64_t round) override;
  void on_timer(Network& net, const TimerEvent& timer) override;
  void on_arrival(Network& net, const ArrivalEvent& arrival) override;
  RoundReport take_report() override;

  [[nodiscard]] const ClusterRoundDriver& driver() const { return driver_; }
  [[nodiscard]] double chance_of(NodeId n) const { return chance_[n.index()]; }

 private:
  enum Tag : int { kAnnounce = 1, kDecide };

  FcaParams params_;
  BaselineSetup setup_;
  ClusterRoundDriver driver_;
  std::uint64_t round_ = 0;
  std::vector<double> chance_;
  // Neighbors heard announcing last round and this round, by node.
  std::vector<std::vector<NodeId>> heard_last_;
  std::vector<std::vector<std::pair<NodeId, double>>> heard_now_;
  std::uint64_t elections_ = 0;
};

}  // namespace sidle
