#include <algorithm>

#include "sidle/baselines.hpp"
#include "sidle/errors.hpp"

namespace sidle {

namespace {

// Control-phase offsets from the start of a cluster round.
constexpr SimTime kJoinAt = 10;
constexpr SimTime kScheduleAt = 20;
constexpr SimTime kDataAt = 30;

}  // namespace

ClusterRoundDriver::ClusterRoundDriver(const Topology& topology, BaselineSetup setup)
    : topology_(topology),
      setup_(std::move(setup)),
      sensors_(setup_.seed, setup_.format.sensors),
      best_advert_(topology.node_count()),
      joined_(topology.node_count()) {
  setup_.format.validate();
  setup_.duty.validate();
  setup_.timing.validate();
}

bool ClusterRoundDriver::is_head(NodeId n) const {
  return std::binary_search(heads_.begin(), heads_.end(), n);
}

RoundReport ClusterRoundDriver::take_report() {
  RoundReport out = report_;
  report_ = {};
  return out;
}

void ClusterRoundDriver::start(Network& net, std::uint64_t round, std::vector<NodeId> heads) {
  round_ = round;
  start_ = net.now();
  heads_ = std::move(heads);
  std::sort(heads_.begin(), heads_.end());
  std::fill(best_advert_.begin(), best_advert_.end(), std::nullopt);
  std::fill(joined_.begin(), joined_.end(), NodeId{});
  members_.clear();
  collected_.clear();

  for (NodeId h : heads_) {
    Message m;
    m.src = h;
    m.channel = kBaselineChannel;
    m.kind = MessageKind::ClusterAdvertise;
    m.power = PowerLevel::Boosted;
    m.reach_m = net.params().profile.boosted.range_m;
    m.payload_size = setup_.format.control_bytes();
    m.body = make_body(Announce{static_cast<std::int64_t>(h.value), ClusterId{}});
    net.broadcast(std::move(m));
  }
  net.queue().schedule(start_ + kJoinAt, TimerEvent{NodeId{}, kJoin, round});
  net.queue().schedule(start_ + kScheduleAt, TimerEvent{NodeId{}, kSchedule, round});
  net.queue().schedule(start_ + kDataAt, TimerEvent{NodeId{}, kDirect, round});
}

bool ClusterRoundDriver::on_timer(Network& net, const TimerEvent& t) {
  const PacketFormat& fmt = setup_.format;
  switch (t.tag) {
    case kJoin:
      for (const NodeInfo& n : topology_.nodes()) {
        const auto& best = best_advert_[n.id.index()];
        if (!net.alive(n.id) || is_head(n.id) || !best) continue;
        joined_[n.id.index()] = best->second;
        Message m;
        m.src = n.id;
        m.dst = best->second;
        m.channel = kBaselineChannel;
        m.code = net.code_of(m.dst);
        m.kind = MessageKind::JoinRequest;
        m.power = PowerLevel::Boosted;
        m.payload_size = fmt.control_bytes();
        net.send(std::move(m));
      }
      return true;
    case kSchedule:
      for (NodeId h : heads_) {
        if (!net.alive(h)) continue;
        std::vector<NodeId>& members = members_[h];
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        if (!members.empty()) {
          double reach = 1.0;
          for (NodeId m : members) reach = std::max(reach, net.distance_between(h, m));
          Message m;
          m.src = h;
          m.channel = kBaselineChannel;
          m.kind = MessageKind::TdmaSchedule;
          m.power = PowerLevel::Boosted;
          m.reach_m = reach;
          m.payload_size = fmt.header_bytes + 2 * members.size();
          m.body = make_body(Schedule{members});
          net.broadcast(std::move(m));
        }
        net.queue().schedule(
            start_ + kDataAt + static_cast<SimTime>(members.size() + 1) * setup_.timing.slot_ms,
            TimerEvent{h, kCollect, round_});
      }
      return true;
    case kReport: {
      const NodeId me = t.node;
      const NodeId head = joined_[me.index()];
      if (!net.alive(me) || !head.valid()) return true;
      charge_active(net, me, setup_.duty, setup_.timing.slot_ms);
      Message m;
      m.src = me;
      m.dst = head;
      m.channel = kBaselineChannel;
      m.code = net.code_of(head);
      m.kind = MessageKind::DataPacket;
      m.power = PowerLevel::Boosted;
      m.payload_size = fmt.sensor_packet_bytes(1);
      m.body = make_body(SensorPacket{{sensors_.sample(me, round_)}});
      net.send(std::move(m));
      return true;
    }
    case kDirect:
      for (const NodeInfo& n : topology_.nodes()) {
        if (!net.alive(n.id) || is_head(n.id) || best_advert_[n.id.index()]) continue;
        const SensorReading r = sensors_.sample(n.id, round_);
        const AggregateRecord rec = aggregate_readings(n.cell, round_, {&r, 1}, fmt);
        if (net.charge(n.id, setup_.duty.cpu_j_per_record, EnergyCause::Cpu) ==
            DrainOutcome::Dead) {
          continue;
        }
        if (net.send_to_base(n.id, rec.size_bytes, MessageKind::RecordUplink)) {
          ++report_.records_delivered;
        }
      }
      return true;
    case kCollect: {
      const NodeId h = t.node;
      if (!net.alive(h)) return true;
      std::vector<SensorReading> readings = collected_[h];
      readings.push_back(sensors_.sample(h, round_));
      const SimTime frame =
          static_cast<SimTime>(members_[h].size() + 1) * setup_.timing.slot_ms;
      charge_active(net, h, setup_.duty, frame);
      if (net.charge(h, setup_.duty.cpu_j_per_record, EnergyCause::Cpu) ==
          DrainOutcome::Dead) {
        return true;
      }
      const AggregateRecord rec =
          aggregate_readings(topology_.node(h).cell, round_, readings, fmt);
      if (net.send_to_base(h, rec.size_bytes, MessageKind::RecordUplink)) {
        ++report_.records_delivered;
      }
      return true;
    }
    default:
      return false;
  }
}

bool ClusterRoundDriver::on_arrival(Network& net, const ArrivalEvent& a) {
  const Message& m = a.message;
  const NodeId me = a.receiver;
  switch (m.kind) {
    case MessageKind::ClusterAdvertise: {
      if (is_head(me)) return true;
      const double rssi = net.rssi_between(m.src, me, m.power);
      auto& best = best_advert_[me.index()];
      if (!best || rssi > best->first || (rssi == best->first && m.src < best->second)) {
        best = std::make_pair(rssi, m.src);
      }
      return true;
    }
    case MessageKind::JoinRequest:
      if (is_head(me)) members_[me].push_back(m.src);
      return true;
    case MessageKind::TdmaSchedule: {
      const Schedule* s = m.as<Schedule>();
      if (s == nullptr || joined_[me.index()] != m.src) return true;
      const auto it = std::find(s->slots.begin(), s->slots.end(), me);
      if (it == s->slots.end()) return true;
      const auto slot = static_cast<SimTime>(it - s->slots.begin());
      net.queue().schedule(start_ + kDataAt + slot * setup_.timing.slot_ms,
                           TimerEvent{me, kReport, round_});
      return true;
    }
    case MessageKind::DataPacket:
      if (is_head(me)) {
        if (const SensorPacket* p = m.as<SensorPacket>()) {
          auto& into = collected_[me];
          into.insert(into.end(), p->readings.begin(), p->readings.end());
        }
      }
      return true;
    default:
      return false;
  }
}

}  // namespace sidle
