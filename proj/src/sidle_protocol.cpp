#include "sidle/sidle_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sidle/errors.hpp"

namespace sidle {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Follower: return "follower";
    case Role::Leader: return "leader";
    case Role::HeadCluster: return "head";
    case Role::Master: return "master";
    case Role::Refugee: return "refugee";
  }
  return "unknown";
}

std::string_view to_string(ElectionReason reason) {
  switch (reason) {
    case ElectionReason::Bootstrap: return "bootstrap";
    case ElectionReason::TermExpired: return "term";
    case ElectionReason::LowEnergy: return "low-energy";
    case ElectionReason::LeaderLost: return "leader-lost";
    case ElectionReason::Master: return "master";
  }
  return "unknown";
}

void NodeProtocolState::upsert_neighbor(NodeId id, double rssi_dbm, SimTime now) {
  auto it = std::lower_bound(neighbor_table.begin(), neighbor_table.end(), id,
                             [](const NeighborEntry& e, NodeId v) { return e.id < v; });
  if (it != neighbor_table.end() && it->id == id) {
    it->last_rssi = rssi_dbm;
    it->last_seen = now;
  } else {
    neighbor_table.insert(it, {id, rssi_dbm, now});
  }
}

void SidleParams::validate() const {
  election.validate();
  polynomial.validate();
  if (term_rounds < 1) throw ConfigError("sidle.term_rounds", "must be >= 1");
  if (!(energy_floor >= 0.0 && energy_floor < 1.0)) {
    throw ConfigError("sidle.energy_floor", "must lie in [0, 1)");
  }
  if (heartbeat_misses < 1) throw ConfigError("sidle.heartbeat_misses", "must be >= 1");
  if (uplink_misses < 1) throw ConfigError("sidle.uplink_misses", "must be >= 1");
  if (max_hops < 1) throw ConfigError("sidle.max_hops", "must be >= 1");
  if (fixed_ng && *fixed_ng < 0) throw ConfigError("sidle.fixed_ng", "must be >= 0");
  if (fixed_pl && *fixed_pl < 0) throw ConfigError("sidle.fixed_pl", "must be >= 0");
  if (claim_offset_ms < 1) throw ConfigError("sidle.claim_offset_ms", "must be >= 1");
  if (election_window_ms <= claim_offset_ms) {
    throw ConfigError("sidle.election_window_ms", "must exceed claim_offset_ms");
  }
  if (head_deadline_ms <= election_window_ms) {
    throw ConfigError("sidle.head_deadline_ms", "must exceed election_window_ms");
  }
  if (master_deadline_ms <= head_deadline_ms) {
    throw ConfigError("sidle.master_deadline_ms", "must exceed head_deadline_ms");
  }
  if (pending_limit < 1) throw ConfigError("sidle.pending_limit", "must be >= 1");
  if (replica_limit < 1) throw ConfigError("sidle.replica_limit", "must be >= 1");
  if (uplink_batch < 1) throw ConfigError("sidle.uplink_batch", "must be >= 1");
}

namespace {

constexpr std::uint64_t kNoExpiry = std::numeric_limits<std::uint64_t>::max();

void add_unique(std::vector<AggregateRecord>& into, const AggregateRecord& rec) {
  for (AggregateRecord& r : into) {
    if (r.origin_cell == rec.origin_cell && r.round == rec.round) {
      r = rec;
      return;
    }
  }
  into.push_back(rec);
}

std::size_t bundle_bytes(const std::vector<AggregateRecord>& records) {
  std::size_t total = 0;
  for (const AggregateRecord& r : records) total += r.size_bytes;
  return total;
}

ChannelIndex reply_channel(const Network& net, const Message& incoming) {
  return net.listens(incoming.src, incoming.channel) ? incoming.channel
                                                     : net.cell_channel(incoming.src);
}

}  // namespace

SidleProtocol::SidleProtocol(Network& net, SidleSetup setup)
    : topology_(net.topology()),
      setup_(std::move(setup)),
      sensors_(setup_.seed, setup_.format.sensors),
      election_rng_(setup_.seed, stream::kElectionDelay),
      cells_(topology_.cells().size()),
      clusters_(topology_.clusters().size()) {
  setup_.params.validate();
  setup_.format.validate();
  setup_.duty.validate();
  setup_.timing.validate();
  if (setup_.params.master_deadline_ms >= setup_.round_period_ms) {
    throw ConfigError("sidle.master_deadline_ms", "must fall inside the round period");
  }
  nodes_.resize(topology_.node_count());
  for (const NodeInfo& n : topology_.nodes()) {
    NodeProtocolState& st = nodes_[n.id.index()];
    st.node_id = n.id;
    st.cell_id = n.cell;
  }
  for (const Cluster& k : topology_.clusters()) {
    nodes_[k.head_node.index()].role = Role::HeadCluster;
    net.add_listening(k.head_node, kHeadChannel);
  }
}

// ---------------------------------------------------------------- queries

bool SidleProtocol::participates(const Network& net, NodeId id) const {
  const NodeProtocolState& st = nodes_[id.index()];
  return net.alive(id) && st.active && st.reset_round != round_;
}

bool SidleProtocol::is_leading(NodeId id) const {
  return nodes_[id.index()].role != Role::Follower;
}

NodeId SidleProtocol::head_of(ClusterId cluster) const {
  return topology_.cluster(cluster).head_node;
}

bool SidleProtocol::head_usable(const Network& net, ClusterId cluster) const {
  return net.alive(head_of(cluster)) && !clusters_[cluster.index()].head_dead_known;
}

std::vector<NodeId> SidleProtocol::live_heads(const Network& net) const {
  std::vector<NodeId> out;
  for (const Cluster& k : topology_.clusters()) {
    if (participates(net, k.head_node)) out.push_back(k.head_node);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> SidleProtocol::cell_candidates(const Network& net, CellId cell) const {
  std::vector<NodeId> out;
  for (NodeId m : topology_.cell(cell).member_ids) {
    if (participates(net, m)) out.push_back(m);
  }
  return out;
}

std::optional<Position> SidleProtocol::uplink_target(const Network& net, ClusterId cluster,
                                                     PowerLevel* level) const {
  if (head_usable(net, cluster)) {
    *level = PowerLevel::High;
    return topology_.node(head_of(cluster)).position;
  }
  const ClusterState& ks = clusters_[cluster.index()];
  if (ks.communicator.valid() && net.alive(ks.communicator)) {
    *level = PowerLevel::Boosted;
    return topology_.node(ks.communicator).position;
  }
  return std::nullopt;
}

PremiershipInputs SidleProtocol::cell_inputs(const Network& net, NodeId candidate) const {
  const SidleParams& p = setup_.params;
  const NodeProtocolState& st = nodes_[candidate.index()];
  const NodeInfo& info = topology_.node(candidate);
  PremiershipInputs in;
  in.re = normalized_residual(net.energy().battery(candidate));

  if (p.fixed_ng) {
    in.ng = *p.fixed_ng;
  } else {
    const SimTime ttl = static_cast<SimTime>(p.term_rounds + 1) * setup_.round_period_ms;
    for (const NeighborEntry& e : st.neighbor_table) {
      if (topology_.node(e.id).cell == info.cell && e.last_seen + ttl >= net.now()) ++in.ng;
    }
  }

  PowerLevel level = PowerLevel::High;
  if (const auto target = uplink_target(net, info.cluster, &level)) {
    const double d = distance(info.position, *target);
    const PathLossParams& low = net.params().profile.low;
    const int hops = std::max(1, static_cast<int>(std::ceil(d / low.range_m)));
    in.pl = std::max(0, p.max_hops - hops);
    const PathLossParams& tier = net.params().profile.at(level);
    in.ss = normalized_ss(rssi_at_distance(d, tier), tier);
  }
  if (p.fixed_pl) in.pl = *p.fixed_pl;
  return in;
}

PremiershipInputs SidleProtocol::head_inputs(const Network& net, NodeId head) const {
  const SidleParams& p = setup_.params;
  const PathLossParams& high = net.params().profile.high;
  const Position pos = topology_.node(head).position;
  PremiershipInputs in;
  in.re = normalized_residual(net.energy().battery(head));
  double nearest = -1.0;
  for (NodeId other : live_heads(net)) {
    if (other == head) continue;
    const double d = distance(pos, topology_.node(other).position);
    if (d <= high.range_m) ++in.ng;
    if (nearest < 0.0 || d < nearest) nearest = d;
  }
  const double to_base = distance(pos, topology_.base_station());
  const int hops = std::max(1, static_cast<int>(std::ceil(to_base / high.range_m)));
  in.pl = std::max(0, p.max_hops - hops);
  if (nearest >= 0.0) in.ss = normalized_ss(rssi_at_distance(nearest, high), high);
  if (p.fixed_ng) in.ng = *p.fixed_ng;
  if (p.fixed_pl) in.pl = *p.fixed_pl;
  return in;
}

std::size_t SidleProtocol::head_arrivals(NodeId head, std::uint64_t round) const {
  const auto it = head_arrivals_.find({head, round});
  return it == head_arrivals_.end() ? 0 : it->second.size();
}

// ---------------------------------------------------------------- rounds

void SidleProtocol::begin_round(Network& net, std::uint64_t round) {
  round_ = round;
  round_start_ = net.now();
  const FrameTiming& timing = setup_.timing;

  for (NodeProtocolState& st : nodes_) {
    if (!net.alive(st.node_id)) continue;
    if (st.reset_round && *st.reset_round < round) {
      st.reset_round.reset();
      broadcast_identity(net, st.node_id);
    }
    if (round == 0) broadcast_identity(net, st.node_id);
    if (round > 0 && !is_leading(st.node_id)) {
      st.missed_heartbeats = st.heard_heartbeat ? 0 : st.missed_heartbeats + 1;
    }
    st.heard_heartbeat = false;
    if (participates(net, st.node_id)) {
      charge_active(net, st.node_id, setup_.duty, timing.listen_window_ms);
    }
  }

  run_master_election(net);
  for (const Cell& c : topology_.cells()) plan_cell(net, c.id);
  for (const Cluster& k : topology_.clusters()) {
    if (!clusters_[k.id.index()].head_dead_known) continue;
    if (refugee_routes_valid(net, k.id)) {
      build_refugee_routes(net, k.id);
    } else {
      handle_head_death(net, k.id);
    }
  }
  issue_commands(net);

  net.queue().schedule(round_start_ + setup_.params.head_deadline_ms,
                       TimerEvent{NodeId{}, kHeadDeadline, round});
  net.queue().schedule(round_start_ + setup_.params.master_deadline_ms,
                       TimerEvent{NodeId{}, kMasterDeadline, round});
}

void SidleProtocol::end_round(Network&, std::uint64_t) {}

RoundReport SidleProtocol::take_report() {
  RoundReport out = report_;
  report_ = {};
  return out;
}

void SidleProtocol::broadcast_identity(Network& net, NodeId node) {
  Message m;
  m.src = node;
  m.channel = net.cell_channel(node);
  m.kind = MessageKind::IdAnnounce;
  m.power = PowerLevel::Low;
  m.payload_size = setup_.format.control_bytes();
  m.body = make_body(Announce{-1, topology_.node(node).cluster});
  net.broadcast(std::move(m));
}

// ---------------------------------------------------------------- elections

void SidleProtocol::run_master_election(Network& net) {
  const bool due = round_ == 0 || !master_.valid() || !net.alive(master_) ||
                   round_ >= master_expiry_;
  if (!due) return;

  const std::vector<NodeId> heads = live_heads(net);
  std::vector<Candidate> candidates;
  for (NodeId h : heads) {
    const PremiershipInputs in = head_inputs(net, h);
    Message m;
    m.src = h;
    m.channel = kHeadChannel;
    m.kind = MessageKind::HeadHeartbeat;
    m.power = PowerLevel::High;
    m.payload_size = setup_.format.control_bytes();
    m.body = make_body(Announce{setup_.params.polynomial.evaluate(in),
                                topology_.node(h).cluster});
    net.broadcast(std::move(m));
    if (net.alive(h)) candidates.push_back({h, in});
  }

  if (master_.valid() && nodes_[master_.index()].role == Role::Master) {
    nodes_[master_.index()].role = Role::HeadCluster;
  }
  try {
    if (candidates.empty()) throw NetworkHeadless("no live head cluster");
    master_ = select_premier_leader(candidates, setup_.params.polynomial);
  } catch (const NetworkHeadless&) {
    master_ = NodeId{};
    if (!headless_reported_) net.trace().note(net.now(), "network-headless", NodeId{});
    headless_reported_ = true;
    return;
  }
  headless_reported_ = false;
  nodes_[master_.index()].role = Role::Master;
  master_expiry_ = round_ + setup_.params.term_rounds;
  elections_.push_back({round_, CellId{}, master_, ElectionReason::Master, 0});
  ++report_.elections_held;
  net.trace().note(net.now(), "master-elected", master_);
}

void SidleProtocol::plan_cell(Network& net, CellId cell) {
  CellState& cs = cells_[cell.index()];
  const Cell& c = topology_.cell(cell);
  const ClusterId cluster = c.cluster_id;
  const NodeId head = head_of(cluster);
  cs.data_start = round_start_ + setup_.params.election_window_ms;
  cs.collected.clear();

  if (cs.extinct) return;
  const bool any_alive = std::any_of(c.member_ids.begin(), c.member_ids.end(),
                                     [&](NodeId m) { return net.alive(m); });
  if (!any_alive) {
    cs.extinct = true;
    cs.leader = NodeId{};
    net.trace().note(net.now(), "cell-extinct", NodeId{}, cell.value);
    return;
  }
  // Everyone rebooting or switched off: the cell sits this round out.
  const bool head_cell =
      c.id == topology_.cluster(cluster).head_cell_id && head_usable(net, cluster);
  if (cell_candidates(net, cell).empty() && !head_cell) return;

  if (head_cell) {
    if (cs.leader != head) {
      install_leader(net, cell, head);
      net.queue().schedule(round_start_ + setup_.params.claim_offset_ms,
                           TimerEvent{head, kClaim, cell.value});
    }
    cs.has_led = true;
  } else if (!cs.has_led) {
    bootstrap_election(net, cell);
  } else {
    const NodeId leader = cs.leader;
    bool lost = !leader.valid();
    for (NodeId m : c.member_ids) {
      const NodeProtocolState& st = nodes_[m.index()];
      if (m != leader && participates(net, m) && !is_leading(m) &&
          st.missed_heartbeats >= setup_.params.heartbeat_misses) {
        lost = true;
      }
    }
    if (leader.valid() && net.alive(leader) && !nodes_[leader.index()].active) lost = true;

    if (lost) {
      rotate_leadership(net, cell, ElectionReason::LeaderLost);
    } else if (round_ >= nodes_[leader.index()].leadership_expiry) {
      rotate_leadership(net, cell, ElectionReason::TermExpired);
    } else if (net.alive(leader) && is_leading(leader)) {
      const Battery& b = net.energy().battery(leader);
      const double ratio = static_cast<double>(b.residual.picojoules()) /
                           static_cast<double>(b.capacity.picojoules());
      if (ratio < setup_.params.energy_floor) {
        rotate_leadership(net, cell, ElectionReason::LowEnergy);
      }
    }
  }
  net.queue().schedule(cs.data_start, TimerEvent{NodeId{}, kCellData, cell.value});
}

void SidleProtocol::bootstrap_election(Network& net, CellId cell) {
  CellState& cs = cells_[cell.index()];
  const std::vector<NodeId> candidates = cell_candidates(net, cell);
  const ElectionResult result = run_cell_election(
      candidates,
      [this](NodeId n, int, SimTime range) {
        const SimTime d = propose_election_delay(election_rng_, range);
        nodes_[n.index()].proposed_delay = d;
        return d;
      },
      setup_.params.election);

  const SimTime claim_at =
      round_start_ + setup_.params.claim_offset_ms + result.claim_delay_ms;
  net.queue().schedule(claim_at, TimerEvent{result.leader, kClaim, cell.value});
  cs.data_start = std::max(cs.data_start, claim_at + setup_.timing.slot_ms);
  cs.has_led = true;
  cs.last_election_round = round_;
  elections_.push_back(
      {round_, cell, result.leader, ElectionReason::Bootstrap, result.restarts});
  ++report_.elections_held;
  net.trace().note(net.now(), "election", result.leader, cell.value, "bootstrap");
}

void SidleProtocol::rotate_leadership(Network& net, CellId cell, ElectionReason reason) {
  CellState& cs = cells_[cell.index()];
  std::vector<Candidate> candidates;
  for (NodeId n : cell_candidates(net, cell)) {
    const PremiershipInputs in = cell_inputs(net, n);
    Message m;
    m.src = n;
    m.channel = net.cell_channel(n);
    m.kind = MessageKind::IdAnnounce;
    m.power = PowerLevel::Low;
    m.payload_size = setup_.format.control_bytes();
    m.body = make_body(Announce{setup_.params.polynomial.evaluate(in),
                                topology_.node(n).cluster});
    net.broadcast(std::move(m));
    if (net.alive(n)) candidates.push_back({n, in});
  }
  if (candidates.empty()) return;

  const NodeId winner = select_premier_leader(candidates, setup_.params.polynomial);
  const NodeId previous = cs.leader;
  install_leader(net, cell, winner);
  if (previous.valid() && previous != winner && net.alive(previous)) {
    NodeProtocolState& old = nodes_[previous.index()];
    NodeProtocolState& now = nodes_[winner.index()];
    for (const AggregateRecord& r : old.custody) add_unique(now.custody, r);
    old.custody.clear();
  }
  for (NodeId m : topology_.cell(cell).member_ids) nodes_[m.index()].missed_heartbeats = 0;
  net.queue().schedule(round_start_ + setup_.params.claim_offset_ms,
                       TimerEvent{winner, kClaim, cell.value});
  elections_.push_back({round_, cell, winner, reason, 0});
  ++report_.elections_held;
  net.trace().note(net.now(), "election", winner, cell.value, to_string(reason));
}

void SidleProtocol::install_leader(Network& net, CellId cell, NodeId leader) {
  CellState& cs = cells_[cell.index()];
  for (NodeId m : topology_.cell(cell).member_ids) {
    if (m != leader && is_leading(m) && !topology_.is_head_node(m)) step_down(net, m);
  }
  cs.leader = leader;
  cs.last_election_round = round_;
  NodeProtocolState& st = nodes_[leader.index()];
  const ClusterId cluster = topology_.node(leader).cluster;
  st.leader = leader;
  st.failed_uplinks = 0;
  st.missed_heartbeats = 0;
  st.handed_through = st.confirmed_through;
  if (topology_.is_head_node(leader)) {
    st.role = leader == master_ ? Role::Master : Role::HeadCluster;
    st.leadership_expiry = kNoExpiry;
  } else {
    st.role = clusters_[cluster.index()].head_dead_known ? Role::Refugee : Role::Leader;
    st.leadership_expiry = round_ + setup_.params.term_rounds;
    net.add_listening(leader, kInterClusterChannel);
  }
}

void SidleProtocol::step_down(Network& net, NodeId node) {
  NodeProtocolState& st = nodes_[node.index()];
  st.role = Role::Follower;
  st.leadership_expiry = 0;
  net.remove_listening(node, kInterClusterChannel);
}

// ---------------------------------------------------------------- failover

void SidleProtocol::handle_head_death(Network& net, ClusterId cluster) {
  ClusterState& ks = clusters_[cluster.index()];
  const NodeId head = head_of(cluster);
  std::vector<NodeId> orphans;
  for (CellId c : topology_.cluster(cluster).cell_ids) {
    const NodeId l = cells_[c.index()].leader;
    if (l.valid() && l != head && net.alive(l) && is_leading(l)) orphans.push_back(l);
  }
  if (net.alive(head)) {
    // A false alarm: the head answers again.
    ks = ClusterState{};
    for (NodeId l : orphans) {
      nodes_[l.index()].role = Role::Leader;
      nodes_[l.index()].failed_uplinks = 0;
    }
    return;
  }

  ks.communicator = NodeId{};
  ks.refugee_next_hop.clear();
  ks.responders.clear();
  for (NodeId l : orphans) {
    NodeProtocolState& ost = nodes_[l.index()];
    ost.role = Role::Refugee;
    // Whatever the dead head had not passed on goes out again.
    ost.handed_through = ost.confirmed_through;
    Message m;
    m.src = l;
    m.channel = kInterClusterChannel;
    m.kind = MessageKind::HeadDeathNotice;
    m.power = PowerLevel::Boosted;
    m.reach_m = net.params().profile.boosted.range_m;
    m.payload_size = setup_.format.control_bytes();
    m.body = make_body(Announce{static_cast<std::int64_t>(head.value), cluster});
    net.broadcast(std::move(m));
  }
  net.trace().note(net.now(), "head-death", head, kTraceNone,
                   orphans.empty() ? "no-leaders" : "notified");
  if (!orphans.empty()) {
    net.queue().schedule(net.now() + 10 * net.params().latency_ms,
                         TimerEvent{NodeId{}, kResolveHeadDeath, cluster.value});
  }
}

void SidleProtocol::resolve_head_death(Network& net, ClusterId cluster) {
  ClusterState& ks = clusters_[cluster.index()];
  if (ks.responders.empty()) {
    if (!ks.isolated) net.trace().note(net.now(), "isolated", head_of(cluster));
    ks.isolated = true;
    return;
  }
  auto best = ks.responders.front();
  for (const auto& r : ks.responders) {
    if (r.second < best.second || (r.second == best.second && r.first < best.first)) {
      best = r;
    }
  }
  ks.communicator = best.first;
  ks.isolated = false;
  if (!ks.refugee_since) ks.refugee_since = round_;
  build_refugee_routes(net, cluster);
  net.trace().note(net.now(), "communicator", ks.communicator, kTraceNone, "adopted");
  // Refugees resend whatever is still unconfirmed along the new routes.
  if (net.now() < round_start_ + setup_.params.head_deadline_ms) {
    for (const auto& [refugee, hop] : ks.refugee_next_hop) uplink(net, refugee, true);
  }
}

bool SidleProtocol::refugee_routes_valid(const Network& net, ClusterId cluster) const {
  const ClusterState& ks = clusters_[cluster.index()];
  const NodeId c = ks.communicator;
  if (!c.valid() || !net.alive(c) || nodes_[c.index()].role != Role::Leader) return false;
  return head_usable(net, topology_.node(c).cluster);
}

void SidleProtocol::build_refugee_routes(Network& net, ClusterId cluster) {
  ClusterState& ks = clusters_[cluster.index()];
  ks.refugee_next_hop.clear();
  std::vector<NodeId> vertices;
  for (CellId c : topology_.cluster(cluster).cell_ids) {
    const NodeId l = cells_[c.index()].leader;
    if (l.valid() && net.alive(l) && is_leading(l) && !topology_.is_head_node(l)) {
      nodes_[l.index()].role = Role::Refugee;
      vertices.push_back(l);
    }
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.push_back(ks.communicator);

  const double range = net.params().profile.boosted.range_m;
  const std::size_t bytes = setup_.format.record_bytes();
  WeightedGraph graph(vertices.size());
  for (std::size_t a = 0; a < vertices.size(); ++a) {
    for (std::size_t b = a + 1; b < vertices.size(); ++b) {
      const double d = net.distance_between(vertices[a], vertices[b]);
      if (d <= range) graph.add_edge(a, b, tx_cost(net.params().cost, bytes, d));
    }
  }
  const PathTree tree = shortest_paths_to(graph, vertices.size() - 1);
  for (std::size_t v = 0; v + 1 < vertices.size(); ++v) {
    if (tree.reachable(v)) ks.refugee_next_hop[vertices[v]] = vertices[tree.next_hop[v]];
  }
}

// ---------------------------------------------------------------- data path

void SidleProtocol::start_data_phase(Network& net, CellId cell) {
  CellState& cs = cells_[cell.index()];
  const NodeId leader = cs.leader;
  std::size_t slot = 0;
  for (NodeId m : topology_.cell(cell).member_ids) {
    if (m == leader || !participates(net, m) || is_leading(m)) continue;
    net.queue().schedule(net.now() + static_cast<SimTime>(slot) * setup_.timing.slot_ms,
                         TimerEvent{m, kReport, cell.value});
    ++slot;
  }
  net.queue().schedule(net.now() + static_cast<SimTime>(slot + 1) * setup_.timing.slot_ms,
                       TimerEvent{NodeId{}, kCollect, cell.value});
}

void SidleProtocol::follower_report(Network& net, NodeId follower) {
  if (!participates(net, follower)) return;
  NodeProtocolState& st = nodes_[follower.index()];
  st.pending.push_back(sensors_.sample(follower, round_));
  if (st.pending.size() > setup_.params.pending_limit) st.pending.erase(st.pending.begin());
  charge_active(net, follower, setup_.duty, setup_.timing.slot_ms);
  if (!st.leader.valid() || st.leader == follower || !net.alive(follower)) return;

  Message m;
  m.src = follower;
  m.dst = st.leader;
  m.channel = net.cell_channel(follower);
  m.code = net.code_of(st.leader);
  m.kind = MessageKind::DataPacket;
  m.power = PowerLevel::Low;
  m.payload_size = setup_.format.sensor_packet_bytes(st.pending.size());
  m.body = make_body(SensorPacket{st.pending});
  reliable_send(net, std::move(m));
}

void SidleProtocol::collect(Network& net, CellId cell) {
  CellState& cs = cells_[cell.index()];
  const NodeId leader = cs.leader;
  if (!leader.valid() || !participates(net, leader) || !is_leading(leader)) return;
  NodeProtocolState& st = nodes_[leader.index()];

  std::vector<SensorReading> readings = st.pending;
  readings.push_back(sensors_.sample(leader, round_));
  for (const auto& [node, rs] : cs.collected) {
    readings.insert(readings.end(), rs.begin(), rs.end());
  }
  st.pending.clear();
  const AggregateRecord rec = aggregate_readings(cell, round_, readings, setup_.format);

  const SimTime frame =
      static_cast<SimTime>(topology_.cell(cell).member_ids.size()) * setup_.timing.slot_ms;
  charge_active(net, leader, setup_.duty, frame);
  if (net.charge(leader, setup_.duty.cpu_j_per_record, EnergyCause::Cpu) ==
      DrainOutcome::Dead) {
    return;
  }
  st.replica_store[{cell, round_}] = rec;

  Message m;
  m.src = leader;
  m.channel = net.cell_channel(leader);
  m.kind = MessageKind::RecordReplica;
  m.power = PowerLevel::Low;
  m.payload_size = rec.size_bytes;
  RecordBundle bundle;
  bundle.records = {rec};
  bundle.confirmed_through = st.confirmed_through;
  m.body = make_body(std::move(bundle));
  net.broadcast(std::move(m));

  uplink(net, leader, true);
}

void SidleProtocol::uplink(Network& net, NodeId holder, bool include_own) {
  if (!net.alive(holder)) return;
  NodeProtocolState& st = nodes_[holder.index()];
  const ClusterId cluster = topology_.node(holder).cluster;
  const bool head = topology_.is_head_node(holder);

  Message m;
  m.src = holder;
  m.kind = MessageKind::RecordUplink;
  m.power = PowerLevel::Boosted;
  RecordBundle bundle;
  if (head) {
    // handled below, no radio hop
  } else if (st.role == Role::Leader && !clusters_[cluster.index()].head_dead_known) {
    // Leaders keep trying their head until enough uplinks go unanswered.
    m.dst = head_of(cluster);
    m.channel = net.cell_channel(m.dst);
    bundle.destination_cluster = cluster;
  } else if (st.role == Role::Refugee) {
    const ClusterState& ks = clusters_[cluster.index()];
    const auto hop = ks.refugee_next_hop.find(holder);
    if (hop == ks.refugee_next_hop.end() || !ks.communicator.valid()) return;
    m.dst = hop->second;
    m.channel = kInterClusterChannel;
    bundle.destination_cluster = topology_.node(ks.communicator).cluster;
  } else {
    return;
  }

  // Oldest unconfirmed own records first, then custody.
  const std::size_t limit =
      head ? std::numeric_limits<std::size_t>::max() : setup_.params.uplink_batch;
  std::vector<AggregateRecord> records;
  if (include_own) {
    const std::int64_t from = std::max(st.confirmed_through, st.handed_through);
    auto it = from < 0 ? st.replica_store.begin()
                       : st.replica_store.upper_bound(
                             RecordKey{st.cell_id, static_cast<std::uint64_t>(from)});
    for (; it != st.replica_store.end() && records.size() < limit; ++it) {
      if (static_cast<std::int64_t>(it->first.round) > from) {
        records.push_back(it->second);
      }
    }
  }
  for (const AggregateRecord& r : st.custody) {
    if (records.size() >= limit) break;
    records.push_back(r);
  }
  if (records.empty()) return;

  if (head) {
    accept_records_at_head(holder, records);
    for (const AggregateRecord& r : records) {
      if (r.origin_cell == st.cell_id) {
        st.handed_through = std::max(st.handed_through, static_cast<std::int64_t>(r.round));
      }
    }
    const auto fwd = st.forwarded_through.find(st.cell_id);
    if (fwd != st.forwarded_through.end()) {
      st.confirmed_through = std::max(st.confirmed_through, fwd->second);
    }
    st.custody.clear();
    prune_replicas(st);
    return;
  }

  m.code = net.code_of(m.dst);
  m.payload_size = bundle_bytes(records);
  bundle.records = std::move(records);
  bundle.confirmed_through = st.confirmed_through;
  m.body = make_body(std::move(bundle));
  reliable_send(net, std::move(m));
}

void SidleProtocol::take_custody(NodeId holder, const std::vector<AggregateRecord>& records) {
  NodeProtocolState& st = nodes_[holder.index()];
  for (const AggregateRecord& r : records) add_unique(st.custody, r);
}

void SidleProtocol::accept_records_at_head(NodeId head,
                                           const std::vector<AggregateRecord>& records) {
  auto& inbox = head_inbox_[head];
  for (const AggregateRecord& r : records) {
    inbox.emplace(RecordKey{r.origin_cell, r.round}, r);
    for (const RecordKey& k : r.provenance) head_arrivals_[{head, k.round}].insert(k);
  }
}

void SidleProtocol::head_deadline(Network& net) {
  const std::vector<NodeId> heads = live_heads(net);
  std::optional<RoutingPlan> plan;
  if (master_.valid() && net.alive(master_) &&
      std::find(heads.begin(), heads.end(), master_) != heads.end()) {
    std::vector<RoutedNode> routed;
    for (NodeId h : heads) routed.push_back({h, topology_.node(h).position});
    plan = plan_routes_to_base(routed, master_, topology_.base_station(),
                               setup_.format.record_bytes(), net.params().cost,
                               net.params().profile.high.range_m);
  }

  for (NodeId h : heads) {
    NodeProtocolState& st = nodes_[h.index()];
    std::vector<AggregateRecord> records;
    for (auto& [key, rec] : head_inbox_[h]) records.push_back(std::move(rec));
    head_inbox_[h].clear();
    records.insert(records.end(), st.custody.begin(), st.custody.end());
    if (records.empty()) continue;

    charge_active(net, h, setup_.duty, setup_.timing.listen_window_ms);
    if (net.charge(h, setup_.duty.cpu_j_per_record, EnergyCause::Cpu) == DrainOutcome::Dead) {
      continue;
    }
    const AggregateRecord merged =
        merge_records(st.cell_id, round_, records, setup_.format);
    st.custody = {merged};
    if (h == master_) {
      master_inbox_[{merged.origin_cell, merged.round}] = merged;
      st.custody.clear();
      continue;
    }
    if (!plan) continue;
    const HeadRoute& route = plan->route_of(h);
    if (!route.reachable || route.path.size() < 2) {
      net.trace().note(net.now(), "head-unreachable", h);
      continue;
    }
    Message m;
    m.src = h;
    m.dst = route.path[1];
    m.channel = kHeadChannel;
    m.code = net.code_of(m.dst);
    m.kind = MessageKind::RecordUplink;
    m.power = PowerLevel::High;
    m.payload_size = merged.size_bytes;
    RecordBundle bundle;
    bundle.records = {merged};
    bundle.route.assign(route.path.begin() + 2, route.path.end());
    bundle.destination_cluster = topology_.node(master_).cluster;
    m.body = make_body(std::move(bundle));
    reliable_send(net, std::move(m));
  }
}

void SidleProtocol::head_relay(Network& net, NodeId head, const RecordBundle& bundle) {
  NodeProtocolState& st = nodes_[head.index()];
  if (bundle.route.empty()) {
    if (head == master_) {
      for (const AggregateRecord& r : bundle.records) {
        master_inbox_[{r.origin_cell, r.round}] = r;
      }
    } else {
      // Mastership moved while the record was in flight; fold it into this
      // head's next record.
      take_custody(head, bundle.records);
    }
    return;
  }
  for (const AggregateRecord& r : bundle.records) add_unique(st.custody, r);
  Message m;
  m.src = head;
  m.dst = bundle.route.front();
  m.channel = kHeadChannel;
  m.code = net.code_of(m.dst);
  m.kind = MessageKind::RecordUplink;
  m.power = PowerLevel::High;
  m.payload_size = bundle_bytes(bundle.records);
  RecordBundle next = bundle;
  next.route.erase(next.route.begin());
  m.body = make_body(std::move(next));
  reliable_send(net, std::move(m));
}

void SidleProtocol::master_deadline(Network& net) {
  if (!master_.valid() || !net.alive(master_) || master_inbox_.empty()) {
    master_inbox_.clear();
    return;
  }
  std::vector<AggregateRecord> records;
  for (auto& [key, rec] : master_inbox_) records.push_back(std::move(rec));
  master_inbox_.clear();
  if (net.charge(master_, setup_.duty.cpu_j_per_record, EnergyCause::Cpu) ==
      DrainOutcome::Dead) {
    return;
  }
  const NodeProtocolState& st = nodes_[master_.index()];
  const AggregateRecord merged = merge_records(st.cell_id, round_, records, setup_.format);
  if (!net.send_to_base(master_, merged.size_bytes, MessageKind::RecordUplink)) return;
  mark_forwarded(master_, {merged});
  for (const RecordKey& k : merged.provenance) {
    if (delivered_.insert(k).second) ++report_.records_delivered;
  }
}

void SidleProtocol::prune_replicas(NodeProtocolState& st) const {
  if (st.replica_store.empty()) return;
  // The store only holds the node's own cell, so keys run in round order.
  const auto latest = std::prev(st.replica_store.end());
  while (st.replica_store.begin() != latest &&
         static_cast<std::int64_t>(st.replica_store.begin()->first.round) <=
             st.confirmed_through) {
    st.replica_store.erase(st.replica_store.begin());
  }
  while (st.replica_store.size() > setup_.params.replica_limit) {
    st.replica_store.erase(st.replica_store.begin());
  }
}

// ---------------------------------------------------------------- reliability

void SidleProtocol::reliable_send(Network& net, Message msg) {
  msg.txn = next_txn_++;
  const std::uint64_t txn = msg.txn;
  const NodeId src = msg.src;
  outstanding_[txn] = Outstanding{msg, 1};
  if (net.send(std::move(msg)) == DeliveryOutcome::SenderDead) {
    outstanding_.erase(txn);
    return;
  }
  net.queue().schedule(net.now() + 3 * net.params().latency_ms,
                       TimerEvent{src, kAckTimeout, txn});
}

void SidleProtocol::on_ack_timeout(Network& net, std::uint64_t txn) {
  auto it = outstanding_.find(txn);
  if (it == outstanding_.end()) return;
  const bool suspected = count_uplink_miss(net, it->second.msg);
  if (!suspected && it->second.retries_left > 0 && net.alive(it->second.msg.src)) {
    --it->second.retries_left;
    if (net.send(it->second.msg) != DeliveryOutcome::SenderDead) {
      net.queue().schedule(net.now() + 3 * net.params().latency_ms,
                           TimerEvent{it->second.msg.src, kAckTimeout, txn});
      return;
    }
  }
  const Message msg = std::move(it->second.msg);
  outstanding_.erase(it);
  on_delivery_failed(net, msg);
}

void SidleProtocol::send_ack(Network& net, const Message& incoming, NodeId from) {
  Message ack;
  ack.src = from;
  ack.dst = incoming.src;
  ack.channel = reply_channel(net, incoming);
  ack.code = net.code_of(incoming.src);
  ack.kind = MessageKind::Ack;
  ack.power = net.can_use(from, incoming.power) ? incoming.power : PowerLevel::Boosted;
  ack.txn = incoming.txn;
  ack.payload_size = setup_.format.control_bytes();
  Ack body{incoming.txn, -1};
  if (incoming.kind == MessageKind::RecordUplink && incoming.channel != kHeadChannel &&
      topology_.is_head_node(from)) {
    const auto& fwd = nodes_[from.index()].forwarded_through;
    const auto it = fwd.find(topology_.node(incoming.src).cell);
    if (it != fwd.end()) body.confirmed_through = it->second;
  }
  ack.body = make_body(body);
  net.send(std::move(ack));
}

void SidleProtocol::on_delivered(Network& net, const Message& msg,
                                 std::int64_t confirmed_through) {
  NodeProtocolState& st = nodes_[msg.src.index()];
  if (msg.kind == MessageKind::DataPacket) {
    st.pending.clear();
    return;
  }
  if (msg.kind != MessageKind::RecordUplink) return;
  const RecordBundle* bundle = msg.as<RecordBundle>();
  if (bundle == nullptr) return;
  const bool to_head = topology_.is_head_node(msg.dst) && msg.channel != kHeadChannel;
  for (const AggregateRecord& r : bundle->records) {
    const auto held = std::find_if(st.custody.begin(), st.custody.end(), [&](const auto& c) {
      return c.origin_cell == r.origin_cell && c.round == r.round;
    });
    if (held != st.custody.end()) {
      st.custody.erase(held);
    } else if (r.origin_cell == st.cell_id) {
      const auto round = static_cast<std::int64_t>(r.round);
      st.handed_through = std::max(st.handed_through, round);
      // A relay leader takes custody for good; a head only vouches for what
      // it has already passed on.
      if (!to_head) st.confirmed_through = std::max(st.confirmed_through, round);
    }
  }
  if (to_head) st.confirmed_through = std::max(st.confirmed_through, confirmed_through);
  if (msg.channel == kHeadChannel) mark_forwarded(msg.src, bundle->records);
  prune_replicas(st);
  if (msg.dst == head_of(topology_.node(msg.src).cluster)) st.failed_uplinks = 0;
  (void)net;
}

void SidleProtocol::mark_forwarded(NodeId head, const std::vector<AggregateRecord>& records) {
  NodeProtocolState& st = nodes_[head.index()];
  const ClusterId cluster = topology_.node(head).cluster;
  for (const AggregateRecord& r : records) {
    for (const RecordKey& k : r.provenance) {
      if (topology_.cell(k.cell).cluster_id != cluster) continue;
      auto& through = st.forwarded_through.try_emplace(k.cell, -1).first->second;
      through = std::max(through, static_cast<std::int64_t>(k.round));
    }
  }
}

bool SidleProtocol::count_uplink_miss(Network& net, const Message& msg) {
  if (msg.kind != MessageKind::RecordUplink || topology_.is_head_node(msg.src)) return false;
  const ClusterId cluster = topology_.node(msg.src).cluster;
  if (msg.dst != head_of(cluster)) return false;
  ClusterState& ks = clusters_[cluster.index()];
  if (ks.head_dead_known) return true;
  NodeProtocolState& st = nodes_[msg.src.index()];
  if (++st.failed_uplinks < setup_.params.uplink_misses) return false;
  ks.head_dead_known = true;
  net.trace().note(net.now(), "head-suspected", head_of(cluster), trace_id(msg.src));
  // The orphaned leaders call for help right away rather than losing a round.
  handle_head_death(net, cluster);
  return true;
}

void SidleProtocol::on_delivery_failed(Network&, const Message&) {
  // Records stay in the replica store or custody and go out with the next
  // uplink.
}

// ---------------------------------------------------------------- commands

void SidleProtocol::issue_commands(Network& net) {
  for (const Command& c : setup_.commands) {
    if (c.round != round_) continue;
    if (!master_.valid() || !net.alive(master_)) {
      net.trace().note(net.now(), "command", c.target, kTraceNone, "no-master");
      continue;
    }
    if (net.charge(master_, rx_cost(net.params().cost, setup_.format.control_bytes()),
                   EnergyCause::Rx) == DrainOutcome::Dead) {
      continue;
    }
    route_command(net, master_, CommandBody{c.target, c.activate});
  }
}

void SidleProtocol::route_command(Network& net, NodeId at, const CommandBody& command) {
  if (at == command.target) {
    nodes_[at.index()].active = command.activate;
    net.trace().note(net.now(), "command-applied", at, kTraceNone,
                     command.activate ? "activate" : "deactivate");
    return;
  }
  const NodeId head = head_of(topology_.node(command.target).cluster);
  Message m;
  m.src = at;
  m.kind = MessageKind::Command;
  m.payload_size = setup_.format.control_bytes();
  m.body = make_body(command);
  if (at != head) {
    m.dst = head;
    m.channel = kHeadChannel;
    m.power = PowerLevel::High;
  } else {
    m.dst = command.target;
    m.channel = net.cell_channel(command.target);
    m.power = PowerLevel::Boosted;
  }
  m.code = net.code_of(m.dst);
  net.send(std::move(m));
}

// ---------------------------------------------------------------- dispatch

void SidleProtocol::on_timer(Network& net, const TimerEvent& t) {
  switch (t.tag) {
    case kClaim: {
      const CellId cell{static_cast<std::uint32_t>(t.cookie)};
      if (!net.alive(t.node)) return;
      if (cells_[cell.index()].leader != t.node) install_leader(net, cell, t.node);
      Message m;
      m.src = t.node;
      m.channel = net.cell_channel(t.node);
      m.kind = MessageKind::LeadershipClaim;
      m.power = PowerLevel::Low;
      m.payload_size = setup_.format.control_bytes();
      m.body = make_body(Announce{static_cast<std::int64_t>(t.node.value),
                                  topology_.node(t.node).cluster});
      net.broadcast(std::move(m));
      return;
    }
    case kCellData:
      start_data_phase(net, CellId{static_cast<std::uint32_t>(t.cookie)});
      return;
    case kReport:
      follower_report(net, t.node);
      return;
    case kAckTimeout:
      on_ack_timeout(net, t.cookie);
      return;
    case kCollect:
      collect(net, CellId{static_cast<std::uint32_t>(t.cookie)});
      return;
    case kHeadDeadline:
      head_deadline(net);
      return;
    case kMasterDeadline:
      master_deadline(net);
      return;
    case kResolveHeadDeath:
      resolve_head_death(net, ClusterId{static_cast<std::uint32_t>(t.cookie)});
      return;
    default:
      throw ContractViolation("sidle: unknown timer tag");
  }
}

void SidleProtocol::on_arrival(Network& net, const ArrivalEvent& a) {
  if (!net.accept(a)) return;
  const Message& m = a.message;
  const NodeId me = a.receiver;
  NodeProtocolState& st = nodes_[me.index()];
  if (st.reset_round == round_) return;
  const bool same_cell = topology_.node(m.src).cell == st.cell_id;
  if (same_cell) st.upsert_neighbor(m.src, net.rssi_between(m.src, me, m.power), net.now());

  switch (m.kind) {
    case MessageKind::IdAnnounce: {
      const Announce* ann = m.as<Announce>();
      // A rejoining member asks who leads; the leader answers directly.
      if (same_cell && ann != nullptr && ann->value < 0 && is_leading(me) &&
          cells_[st.cell_id.index()].leader == me && round_ > 0) {
        Message claim;
        claim.src = me;
        claim.dst = m.src;
        claim.channel = net.cell_channel(me);
        claim.code = net.code_of(m.src);
        claim.kind = MessageKind::LeadershipClaim;
        claim.power = PowerLevel::Low;
        claim.payload_size = setup_.format.control_bytes();
        claim.body = make_body(Announce{static_cast<std::int64_t>(me.value),
                                        topology_.node(me).cluster});
        net.send(std::move(claim));
      }
      return;
    }
    case MessageKind::LeadershipClaim:
      if (same_cell) {
        st.leader = m.src;
        st.heard_heartbeat = true;
        st.missed_heartbeats = 0;
      }
      return;
    case MessageKind::DataPacket: {
      if (!is_leading(me) || cells_[st.cell_id.index()].leader != me || !same_cell) return;
      if (const SensorPacket* p = m.as<SensorPacket>()) {
        cells_[st.cell_id.index()].collected[m.src] = p->readings;
      }
      send_ack(net, m, me);
      return;
    }
    case MessageKind::Ack: {
      auto it = outstanding_.find(m.txn);
      if (it == outstanding_.end() || it->second.msg.src != me) return;
      const Message original = std::move(it->second.msg);
      outstanding_.erase(it);
      const Ack* a = m.as<Ack>();
      on_delivered(net, original, a ? a->confirmed_through : -1);
      return;
    }
    case MessageKind::RecordReplica: {
      const RecordBundle* b = m.as<RecordBundle>();
      if (!same_cell || b == nullptr) return;
      for (const AggregateRecord& r : b->records) {
        st.replica_store[{r.origin_cell, r.round}] = r;
      }
      st.leader = m.src;
      st.heard_heartbeat = true;
      st.missed_heartbeats = 0;
      st.confirmed_through = std::max(st.confirmed_through, b->confirmed_through);
      prune_replicas(st);
      return;
    }
    case MessageKind::RecordUplink: {
      const RecordBundle* b = m.as<RecordBundle>();
      if (b == nullptr) return;
      send_ack(net, m, me);
      if (m.channel == kHeadChannel) {
        head_relay(net, me, *b);
      } else if (topology_.is_head_node(me)) {
        accept_records_at_head(me, b->records);
      } else if (is_leading(me)) {
        take_custody(me, b->records);
        uplink(net, me, false);
      }
      return;
    }
    case MessageKind::HeadDeathNotice: {
      const Announce* ann = m.as<Announce>();
      if (ann == nullptr) return;
      const ClusterId mine = topology_.node(me).cluster;
      if (m.is_broadcast()) {
        if (st.role != Role::Leader || ann->cluster == mine || !head_usable(net, mine)) return;
        Message reply;
        reply.src = me;
        reply.dst = m.src;
        reply.channel = kInterClusterChannel;
        reply.code = net.code_of(m.src);
        reply.kind = MessageKind::HeadDeathNotice;
        reply.power = PowerLevel::Boosted;
        reply.payload_size = setup_.format.control_bytes();
        reply.body = make_body(Announce{static_cast<std::int64_t>(me.value), mine});
        net.send(std::move(reply));
      } else if (st.role == Role::Refugee) {
        clusters_[mine.index()].responders.emplace_back(m.src,
                                                        net.distance_between(m.src, me));
      }
      return;
    }
    case MessageKind::Command:
      if (const CommandBody* c = m.as<CommandBody>()) route_command(net, me, *c);
      return;
    default:
      return;
  }
}

void SidleProtocol::on_failure(Network& net, const NodeFailureEvent& failure) {
  if (failure.action != FailureAction::Reset || !net.alive(failure.node)) return;
  NodeProtocolState& st = nodes_[failure.node.index()];
  const bool head = topology_.is_head_node(failure.node);
  if (!head && is_leading(failure.node)) step_down(net, failure.node);
  st.neighbor_table.clear();
  st.proposed_delay.reset();
  st.replica_store.clear();
  st.leader = head ? failure.node : NodeId{};
  st.missed_heartbeats = 0;
  st.pending.clear();
  st.custody.clear();
  st.failed_uplinks = 0;
  st.confirmed_through = -1;
  st.handed_through = -1;
  st.forwarded_through.clear();
  st.reset_round = round_;
  if (head) head_inbox_[failure.node].clear();
  net.trace().note(net.now(), "watchdog-reset", failure.node);
}

// ---------------------------------------------------------------- invariants

std::vector<std::string> SidleProtocol::check_invariants(const Network& net) const {
  std::vector<std::string> out;
  for (const Cell& c : topology_.cells()) {
    int leaders = 0;
    for (NodeId m : c.member_ids) {
      if (net.alive(m) && is_leading(m)) ++leaders;
    }
    if (leaders > 1) {
      out.push_back("cell " + std::to_string(c.id.value) + " has " +
                    std::to_string(leaders) + " leaders");
    }
  }
  int masters = 0;
  for (const NodeProtocolState& st : nodes_) {
    if (!net.alive(st.node_id)) continue;
    if (st.role == Role::Master) ++masters;
    if (st.role == Role::Refugee) {
      const ClusterId k = topology_.node(st.node_id).cluster;
      if (net.alive(head_of(k)) && !clusters_[k.index()].head_dead_known) {
        out.push_back("node " + std::to_string(st.node_id.value) +
                      " is a refugee of a live head");
      }
    }
  }
  if (masters > 1) out.push_back(std::to_string(masters) + " masters");
  return out;
}

}  // namespace sidle
