#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "sidle/aggregate.hpp"
#include "sidle/ids.hpp"

namespace sidle {

enum class MessageKind : std::uint8_t {
  IdAnnounce,
  LeadershipClaim,
  DataPacket,
  Ack,
  RecordReplica,
  RecordUplink,
  HeadDeathNotice,
  HeadHeartbeat,
  Command,
  ClusterAdvertise,
  JoinRequest,
  TdmaSchedule,
  ChanceAnnounce,
};

[[nodiscard]] std::string_view to_string(MessageKind kind);

// Transmit power tier. Primitive nodes use Low inside their cell and Boosted
// for leader uplinks; Sophisticated nodes also have the long-range High tier.
enum class PowerLevel : std::uint8_t { Low, Boosted, High };

inline constexpr ChannelIndex kInterClusterChannel = 1000;
inline constexpr ChannelIndex kHeadChannel = 1001;
inline constexpr ChannelIndex kBaselineChannel = 2000;
inline constexpr CodeIndex kBroadcastCode = -1;

struct SensorPacket {
  std::vector<SensorReading> readings;
};

struct RecordBundle {
  std::vector<AggregateRecord> records;
  // Remaining source route, next hop first. Empty when dst is final.
  std::vector<NodeId> route;
  // Cluster whose head is the bundle's destination.
  ClusterId destination_cluster;
  // Latest round of the sender's cell known to have left the cell. Lets
  // replica holders drop records that no longer need recovery.
  std::int64_t confirmed_through = -1;
};

struct Ack {
  std::uint64_t txn = 0;
  // From a head: latest round of the sender's cell the head has passed on.
  std::int64_t confirmed_through = -1;
};

// Scalar announcement: candidacy score, fuzzy chance, heartbeat sequence.
struct Announce {
  std::int64_t value = 0;
  ClusterId cluster;
};

struct Schedule {
  std::vector<NodeId> slots;
};

struct CommandBody {
  NodeId target;
  bool activate = true;
};

using MessageBody = std::variant<std::monostate, SensorPacket, RecordBundle, Ack,
                                 Announce, Schedule, CommandBody>;

struct Message {
  std::uint64_t id = 0;   // assigned by the network on send
  std::uint64_t txn = 0;  // reliable-send transaction, echoed by acks
  NodeId src;
  NodeId dst;  // invalid = broadcast on channel
  ChannelIndex channel = 0;
  CodeIndex code = kBroadcastCode;
  std::size_t payload_size = 0;
  MessageKind kind = MessageKind::IdAnnounce;
  PowerLevel power = PowerLevel::Low;
  // Broadcast audience radius; defaults to the power tier's range.
  std::optional<double> reach_m;
  std::shared_ptr<const MessageBody> body;

  [[nodiscard]] bool is_broadcast() const { return !dst.valid(); }

  template <typename T>
  [[nodiscard]] const T* as() const {
    return body ? std::get_if<T>(body.get()) : nullptr;
  }
};

template <typename T>
std::shared_ptr<const MessageBody> make_body(T value) {
  return std::make_shared<const MessageBody>(std::move(value));
}

}  // namespace sidle
