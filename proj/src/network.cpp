#include "sidle/network.hpp"

#include <algorithm>
#include <string>

#include "sidle/errors.hpp"

namespace sidle {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::IdAnnounce: return "id-announce";
    case MessageKind::LeadershipClaim: return "leadership-claim";
    case MessageKind::DataPacket: return "data";
    case MessageKind::Ack: return "ack";
    case MessageKind::RecordReplica: return "replica";
    case MessageKind::RecordUplink: return "uplink";
    case MessageKind::HeadDeathNotice: return "head-death-notice";
    case MessageKind::HeadHeartbeat: return "head-heartbeat";
    case MessageKind::Command: return "command";
    case MessageKind::ClusterAdvertise: return "ch-advertise";
    case MessageKind::JoinRequest: return "join";
    case MessageKind::TdmaSchedule: return "tdma-schedule";
    case MessageKind::ChanceAnnounce: return "chance";
  }
  return "unknown";
}

void NetworkParams::validate() const {
  profile.validate();
  cost.validate();
  if (latency_ms < 1) throw ConfigError("radio.latency_ms", "must be >= 1");
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) {
    throw ConfigError("radio.loss_probability", "must lie in [0, 1]");
  }
}

Network::Network(const Topology& topology, NetworkParams params, EnergyLedger& energy,
                 EventQueue& queue, Trace& trace, std::uint64_t seed)
    : topology_(topology),
      params_(std::move(params)),
      energy_(energy),
      queue_(queue),
      trace_(trace),
      loss_(seed, stream::kLoss),
      alive_(topology.node_count(), true),
      alive_count_(topology.node_count()),
      listening_(topology.node_count()) {
  params_.validate();
  if (energy_.size() != topology.node_count()) {
    throw ContractViolation("network: one battery per node required");
  }
  for (const NodeInfo& n : topology.nodes()) {
    listening_[n.id.index()] = {topology.cell(n.cell).frequency_channel};
  }
}

bool Network::can_use(NodeId node, PowerLevel level) const {
  return level != PowerLevel::High ||
         topology_.node(node).hardware == HardwareClass::Sophisticated;
}

DrainOutcome Network::charge(NodeId node, double joules, EnergyCause cause) {
  if (!alive(node)) return DrainOutcome::Dead;
  const DrainOutcome out =
      energy_.drain(node, now(), Energy::from_joules(joules), cause);
  if (out == DrainOutcome::Dead) kill(node, "energy");
  return out;
}

void Network::kill(NodeId node, std::string_view reason) {
  if (!alive_[node.index()]) return;
  alive_[node.index()] = false;
  --alive_count_;
  trace_.note(now(), "death", node, kTraceNone, reason);
}

bool Network::pay_tx(const Message& msg, double distance_m) {
  if (!alive(msg.src)) return false;
  const double cost = tx_cost(params_.cost, msg.payload_size, distance_m);
  bytes_on_air_ += msg.payload_size;
  ++messages_sent_;
  return charge(msg.src, cost, EnergyCause::Tx) == DrainOutcome::Alive;
}

void Network::schedule_arrival(NodeId receiver, const Message& msg) {
  queue_.schedule(now() + params_.latency_ms, ArrivalEvent{receiver, msg});
}

DeliveryOutcome Network::send(Message msg) {
  if (msg.is_broadcast()) throw ContractViolation("send: unicast requires a dst");
  if (msg.payload_size == 0) throw ContractViolation("send: empty payload");
  if (!can_use(msg.src, msg.power)) {
    throw ContractViolation("send: node lacks the requested power tier");
  }
  if (!alive(msg.src)) return DeliveryOutcome::SenderDead;
  msg.id = next_message_id_++;
  const NodeInfo& src = topology_.node(msg.src);
  const NodeInfo& dst = topology_.node(msg.dst);
  const double d = distance(src.position, dst.position);
  const std::string_view kind = to_string(msg.kind);
  if (!pay_tx(msg, d)) {
    trace_.record(now(), kind, trace_id(msg.src), trace_id(msg.dst), msg.payload_size,
                  to_string(DeliveryOutcome::SenderDead));
    return DeliveryOutcome::SenderDead;
  }
  const PathLossParams& pl = params_.profile.at(msg.power);
  DeliveryOutcome out =
      link_verdict(src.position, dst.position, pl, params_.loss_probability,
                   loss_.uniform01());
  if (out == DeliveryOutcome::Delivered) {
    if (!listens(msg.dst, msg.channel) || msg.code != code_of(msg.dst)) {
      out = DeliveryOutcome::NotListening;
    } else if (!alive(msg.dst)) {
      out = DeliveryOutcome::ReceiverDead;
    }
  }
  trace_.record(now(), kind, trace_id(msg.src), trace_id(msg.dst), msg.payload_size,
                to_string(out));
  if (out == DeliveryOutcome::Delivered) schedule_arrival(msg.dst, msg);
  return out;
}

std::size_t Network::broadcast(Message msg) {
  if (!msg.is_broadcast()) throw ContractViolation("broadcast: dst must be unset");
  if (msg.payload_size == 0) throw ContractViolation("broadcast: empty payload");
  if (!can_use(msg.src, msg.power)) {
    throw ContractViolation("broadcast: node lacks the requested power tier");
  }
  if (!alive(msg.src)) return 0;
  msg.id = next_message_id_++;
  const PathLossParams& pl = params_.profile.at(msg.power);
  const double reach = std::min(msg.reach_m.value_or(pl.range_m), pl.range_m);
  const Position origin = topology_.node(msg.src).position;

  // Audience: live listeners on the channel within reach. The sender sizes
  // its transmit power to the farthest of them.
  std::vector<NodeId> audience;
  double farthest = 0.0;
  for (NodeId n : topology_.neighbors_within(msg.src, reach)) {
    if (!alive(n) || !listens(n, msg.channel)) continue;
    audience.push_back(n);
    farthest = std::max(farthest, distance(origin, topology_.node(n).position));
  }
  if (msg.reach_m) farthest = reach;

  const std::string_view kind = to_string(msg.kind);
  if (!pay_tx(msg, farthest)) {
    trace_.record(now(), kind, trace_id(msg.src), kTraceBroadcast, msg.payload_size,
                  to_string(DeliveryOutcome::SenderDead));
    return 0;
  }
  std::size_t reached = 0;
  for (NodeId n : audience) {
    const DeliveryOutcome out =
        link_verdict(origin, topology_.node(n).position, pl, params_.loss_probability,
                     loss_.uniform01());
    trace_.record(now(), kind, trace_id(msg.src), trace_id(n), msg.payload_size,
                  to_string(out));
    if (out == DeliveryOutcome::Delivered) {
      schedule_arrival(n, msg);
      ++reached;
    }
  }
  return reached;
}

bool Network::send_to_base(NodeId src, std::size_t bytes, MessageKind kind) {
  if (bytes == 0) throw ContractViolation("send_to_base: empty payload");
  if (!alive(src)) return false;
  Message msg;
  msg.src = src;
  msg.payload_size = bytes;
  msg.kind = kind;
  const double d = distance(topology_.node(src).position, topology_.base_station());
  const bool ok = pay_tx(msg, d);
  trace_.record(now(), to_string(kind), trace_id(src), kTraceBase, bytes,
                to_string(ok ? DeliveryOutcome::Delivered : DeliveryOutcome::SenderDead));
  return ok;
}

bool Network::accept(const ArrivalEvent& arrival) {
  if (!alive(arrival.receiver)) return false;
  const double cost = rx_cost(params_.cost, arrival.message.payload_size);
  return charge(arrival.receiver, cost, EnergyCause::Rx) == DrainOutcome::Alive;
}

void Network::set_listening(NodeId node, std::vector<ChannelIndex> channels) {
  listening_.at(node.index()) = std::move(channels);
}

void Network::add_listening(NodeId node, ChannelIndex channel) {
  auto& v = listening_.at(node.index());
  if (std::find(v.begin(), v.end(), channel) == v.end()) v.push_back(channel);
}

void Network::remove_listening(NodeId node, ChannelIndex channel) {
  auto& v = listening_.at(node.index());
  v.erase(std::remove(v.begin(), v.end(), channel), v.end());
}

bool Network::listens(NodeId node, ChannelIndex channel) const {
  const auto& v = listening_[node.index()];
  return std::find(v.begin(), v.end(), channel) != v.end();
}

CodeIndex Network::code_of(NodeId node) const {
  return topology_.channel_plan().node_code.at(node.index());
}

ChannelIndex Network::cell_channel(NodeId node) const {
  return topology_.cell(topology_.node(node).cell).frequency_channel;
}

double Network::distance_between(NodeId a, NodeId b) const {
  return distance(topology_.node(a).position, topology_.node(b).position);
}

double Network::rssi_between(NodeId tx, NodeId rx, PowerLevel level) const {
  return rssi(topology_.node(tx).position, topology_.node(rx).position,
              params_.profile.at(level));
}

}  // namespace sidle
