#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sidle/energy.hpp"
#include "sidle/event_queue.hpp"
#include "sidle/message.hpp"
#include "sidle/radio.hpp"
#include "sidle/rng.hpp"
#include "sidle/topology.hpp"
#include "sidle/trace.hpp"

namespace sidle {

struct NetworkParams {
  RadioProfile profile;
  RadioCostModel cost;
  SimTime latency_ms = 2;
  double loss_probability = 0.0;

  void validate() const;
};

// Shared radio medium and node liveness. Every protocol sends through here,
// so all of them pay for the air with the same energy accounting.
class Network {
 public:
  Network(const Topology& topology, NetworkParams params, EnergyLedger& energy,
          EventQueue& queue, Trace& trace, std::uint64_t seed);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  // Unicast to msg.dst. The sender pays tx for the hop distance whatever
  // the outcome; on delivery an arrival is scheduled after the hop latency.
  DeliveryOutcome send(Message msg);
  // Broadcast on msg.channel. Returns the number of receivers reached.
  std::size_t broadcast(Message msg);
  // Uplink to the base-station sink, which is always listening and not
  // range-limited. Returns false only when the sender is dead.
  bool send_to_base(NodeId src, std::size_t bytes, MessageKind kind);

  // Charges the receiver for an arriving message. False when it has died
  // since the message was put on the air.
  bool accept(const ArrivalEvent& arrival);

  DrainOutcome charge(NodeId node, double joules, EnergyCause cause);
  void kill(NodeId node, std::string_view reason);

  [[nodiscard]] bool alive(NodeId node) const { return alive_[node.index()]; }
  [[nodiscard]] std::size_t alive_count() const { return alive_count_; }

  void set_listening(NodeId node, std::vector<ChannelIndex> channels);
  void add_listening(NodeId node, ChannelIndex channel);
  void remove_listening(NodeId node, ChannelIndex channel);
  [[nodiscard]] bool listens(NodeId node, ChannelIndex channel) const;

  [[nodiscard]] CodeIndex code_of(NodeId node) const;
  [[nodiscard]] ChannelIndex cell_channel(NodeId node) const;
  [[nodiscard]] double distance_between(NodeId a, NodeId b) const;
  [[nodiscard]] double rssi_between(NodeId tx, NodeId rx, PowerLevel level) const;
  [[nodiscard]] bool can_use(NodeId node, PowerLevel level) const;

  [[nodiscard]] const Topology& topology() const { return topology_; }
  [[nodiscard]] const NetworkParams& params() const { return params_; }
  [[nodiscard]] EnergyLedger& energy() { return energy_; }
  [[nodiscard]] const EnergyLedger& energy() const { return energy_; }
  [[nodiscard]] EventQueue& queue() { return queue_; }
  [[nodiscard]] Trace& trace() { return trace_; }
  [[nodiscard]] SimTime now() const { return queue_.now(); }

  [[nodiscard]] std::uint64_t bytes_on_air() const { return bytes_on_air_; }
  [[nodiscard]] std::uint64_t messages_sent() const { return messages_sent_; }

 private:
  // Pays tx. False when the sender is dead or dies paying.
  bool pay_tx(const Message& msg, double distance_m);
  void schedule_arrival(NodeId receiver, const Message& msg);

  const Topology& topology_;
  NetworkParams params_;
  EnergyLedger& energy_;
  EventQueue& queue_;
  Trace& trace_;
  RngStream loss_;
  std::vector<bool> alive_;
  std::size_t alive_count_;
  std::vector<std::vector<ChannelIndex>> listening_;
  std::uint64_t next_message_id_ = 1;
  std::uint64_t bytes_on_air_ = 0;
  std::uint64_t messages_sent_ = 0;
};

}  // namespace sidle
