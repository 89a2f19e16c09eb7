#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sidle/aggregate.hpp"
#include "sidle/election.hpp"
#include "sidle/premiership.hpp"
#include "sidle/protocol.hpp"
#include "sidle/routing.hpp"

namespace sidle {

enum class Role : std::uint8_t { Follower, Leader, HeadCluster, Master, Refugee };

[[nodiscard]] std::string_view to_string(Role role);

struct NeighborEntry {
  NodeId id;
  double last_rssi = 0.0;
  SimTime last_seen = 0;
};

struct NodeProtocolState {
  NodeId node_id;
  Role role = Role::Follower;
  CellId cell_id;
  std::vector<NeighborEntry> neighbor_table;  // ascending id
  std::optional<SimTime> proposed_delay;
  std::uint64_t leadership_expiry = 0;  // round at which the current term ends
  // Own-cell aggregate records kept for recovery: everything not yet known
  // to have left the cell, plus the latest one.
  std::map<RecordKey, AggregateRecord> replica_store;

  NodeId leader;  // the leader this node reports to
  int missed_heartbeats = 0;
  bool heard_heartbeat = false;
  std::vector<SensorReading> pending;  // readings not yet acknowledged

  std::int64_t confirmed_through = -1;  // own-cell records safely past the head
  std::int64_t handed_through = -1;     // own-cell records acked by the next hop
  std::vector<AggregateRecord> custody;  // records held on behalf of others
  int failed_uplinks = 0;
  // Heads only: per own-cluster cell, latest round passed on toward the base.
  std::map<CellId, std::int64_t> forwarded_through;

  bool active = true;  // base-station command flag
  std::optional<std::uint64_t> reset_round;

  void upsert_neighbor(NodeId id, double rssi_dbm, SimTime now);
};

struct SidleParams {
  ElectionParams election;
  std::uint32_t term_rounds = 20;
  double energy_floor = 0.2;  // fraction of capacity that forces a rotation
  int heartbeat_misses = 2;
  int uplink_misses = 2;
  int max_hops = 4;
  PremiershipPolynomial polynomial;
  // Fixed Ng / Pl for every candidate, as in the bench hardware setup.
  std::optional<int> fixed_ng;
  std::optional<int> fixed_pl;

  SimTime claim_offset_ms = 50;       // candidacy, then claims from here on
  SimTime election_window_ms = 2000;  // data collection starts after this
  SimTime head_deadline_ms = 40000;
  SimTime master_deadline_ms = 50000;
  std::size_t pending_limit = 4;      // readings a follower retains
  std::size_t replica_limit = 1440;   // records a node keeps in isolation
  std::size_t uplink_batch = 8;       // records per uplink bundle

  void validate() const;
};

struct Command {
  std::uint64_t round = 0;
  NodeId target;
  bool activate = true;
};

enum class ElectionReason : std::uint8_t {
  Bootstrap,
  TermExpired,
  LowEnergy,
  LeaderLost,
  Master,
};

[[nodiscard]] std::string_view to_string(ElectionReason reason);

struct ElectionLogEntry {
  std::uint64_t round = 0;
  CellId cell;  // invalid for master elections
  NodeId winner;
  ElectionReason reason = ElectionReason::Bootstrap;
  int restarts = 0;
};

struct CellState {
  NodeId leader;
  bool extinct = false;
  bool has_led = false;  // a leader has been elected at least once
  std::uint64_t last_election_round = 0;
  SimTime data_start = 0;
  std::map<NodeId, std::vector<SensorReading>> collected;  // this round
};

struct ClusterState {
  bool head_dead_known = false;
  bool isolated = false;
  NodeId communicator;
  std::optional<std::uint64_t> refugee_since;
  // Orphaned leader -> next hop toward the communicator.
  std::map<NodeId, NodeId> refugee_next_hop;
  // Responses to head-death notices heard this round: (responder, distance).
  std::vector<std::pair<NodeId, double>> responders;
};

struct SidleSetup {
  SidleParams params;
  PacketFormat format;
  DutyCostModel duty;
  FrameTiming timing;
  SimTime round_period_ms = 60000;
  std::uint64_t seed = 1;
  std::vector<Command> commands;
};

class SidleProtocol final : public Protocol {
 public:
  SidleProtocol(Network& net, SidleSetup setup);

  [[nodiscard]] std::string_view name() const override { return "sidle"; }
  void begin_round(Network& net, std::uint64_t round) override;
  void on_timer(Network& net, const TimerEvent& timer) override;
  void on_arrival(Network& net, const ArrivalEvent& arrival) override;
  void on_failure(Network& net, const NodeFailureEvent& failure) override;
  void end_round(Network& net, std::uint64_t round) override;
  RoundReport take_report() override;
  [[nodiscard]] std::vector<std::string> check_invariants(const Network& net) const override;

  [[nodiscard]] const NodeProtocolState& node_state(NodeId id) const {
    return nodes_.at(id.index());
  }
  [[nodiscard]] const CellState& cell_state(CellId id) const { return cells_.at(id.index()); }
  [[nodiscard]] const ClusterState& cluster_state(ClusterId id) const {
    return clusters_.at(id.index());
  }
  [[nodiscard]] NodeId master() const { return master_; }
  [[nodiscard]] const std::vector<ElectionLogEntry>& elections() const { return elections_; }
  [[nodiscard]] const std::set<RecordKey>& delivered() const { return delivered_; }
  // Distinct cell records of `round` that reached `head` from its leaders
  // or its communicator.
  [[nodiscard]] std::size_t head_arrivals(NodeId head, std::uint64_t round) const;
  [[nodiscard]] const SidleParams& params() const { return setup_.params; }

  [[nodiscard]] PremiershipInputs cell_inputs(const Network& net, NodeId candidate) const;
  [[nodiscard]] PremiershipInputs head_inputs(const Network& net, NodeId head) const;

 private:
  struct Outstanding {
    Message msg;
    int retries_left = 1;
  };

  enum TimerTag : int {
    kClaim = 1,
    kCellData,
    kReport,
    kAckTimeout,
    kCollect,
    kHeadDeadline,
    kMasterDeadline,
    kResolveHeadDeath,
  };

  [[nodiscard]] bool participates(const Network& net, NodeId id) const;
  [[nodiscard]] bool is_leading(NodeId id) const;
  [[nodiscard]] NodeId head_of(ClusterId cluster) const;
  [[nodiscard]] bool head_usable(const Network& net, ClusterId cluster) const;
  [[nodiscard]] std::vector<NodeId> live_heads(const Network& net) const;
  [[nodiscard]] std::vector<NodeId> cell_candidates(const Network& net, CellId cell) const;
  [[nodiscard]] std::optional<Position> uplink_target(const Network& net, ClusterId cluster,
                                                      PowerLevel* level) const;

  void broadcast_identity(Network& net, NodeId node);
  void run_master_election(Network& net);
  void plan_cell(Network& net, CellId cell);
  void bootstrap_election(Network& net, CellId cell);
  void rotate_leadership(Network& net, CellId cell, ElectionReason reason);
  void install_leader(Network& net, CellId cell, NodeId leader);
  void step_down(Network& net, NodeId node);
  void handle_head_death(Network& net, ClusterId cluster);
  void resolve_head_death(Network& net, ClusterId cluster);
  void build_refugee_routes(Network& net, ClusterId cluster);
  [[nodiscard]] bool refugee_routes_valid(const Network& net, ClusterId cluster) const;
  void issue_commands(Network& net);

  void start_data_phase(Network& net, CellId cell);
  void follower_report(Network& net, NodeId follower);
  void collect(Network& net, CellId cell);
  void head_deadline(Network& net);
  void master_deadline(Network& net);

  void reliable_send(Network& net, Message msg);
  void on_ack_timeout(Network& net, std::uint64_t txn);
  // Counts an unanswered uplink to the own head; true once the head is
  // suspected dead.
  bool count_uplink_miss(Network& net, const Message& msg);
  void on_delivery_failed(Network& net, const Message& msg);
  void on_delivered(Network& net, const Message& msg, std::int64_t confirmed_through);
  void mark_forwarded(NodeId head, const std::vector<AggregateRecord>& records);
  void send_ack(Network& net, const Message& incoming, NodeId from);

  void accept_records_at_head(NodeId head, const std::vector<AggregateRecord>& records);
  void take_custody(NodeId holder, const std::vector<AggregateRecord>& records);
  // Sends the holder's unconfirmed own records (optionally) and custody
  // toward its cluster head or, for refugees, the next hop.
  void uplink(Network& net, NodeId holder, bool include_own);
  void head_relay(Network& net, NodeId head, const RecordBundle& bundle);
  void route_command(Network& net, NodeId at, const CommandBody& command);
  void prune_replicas(NodeProtocolState& st) const;

  const Topology& topology_;
  SidleSetup setup_;
  SensorModel sensors_;
  RngStream election_rng_;

  std::vector<NodeProtocolState> nodes_;
  std::vector<CellState> cells_;
  std::vector<ClusterState> clusters_;
  NodeId master_;
  std::uint64_t master_expiry_ = 0;
  bool headless_reported_ = false;

  std::uint64_t round_ = 0;
  SimTime round_start_ = 0;
  std::uint64_t next_txn_ = 1;
  std::map<std::uint64_t, Outstanding> outstanding_;

  std::map<NodeId, std::map<RecordKey, AggregateRecord>> head_inbox_;
  std::map<RecordKey, AggregateRecord> master_inbox_;
  std::map<std::pair<NodeId, std::uint64_t>, std::set<RecordKey>> head_arrivals_;
  std::set<RecordKey> delivered_;
  std::vector<ElectionLogEntry> elections_;
  RoundReport report_;
};

}  // namespace sidle
