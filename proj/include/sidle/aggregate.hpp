#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sidle/ids.hpp"

namespace sidle {

inline constexpr std::size_t kMaxRecordBytes = 250;

// Byte layout of sensor packets and aggregate records on the air.
struct PacketFormat {
  std::size_t sensors = 10;
  std::size_t bytes_per_reading = 4;  // float32
  std::size_t header_bytes = 8;
  std::size_t crypto_overhead_bytes = 16;
  // mean, min, max as float32 plus a 32-bit count
  std::size_t summary_bytes_per_channel = 16;

  void validate() const;

  [[nodiscard]] std::size_t reading_bytes() const {
    return sensors * bytes_per_reading;
  }
  [[nodiscard]] std::size_t sensor_packet_bytes(std::size_t readings) const {
    return header_bytes + crypto_overhead_bytes + readings * reading_bytes();
  }
  [[nodiscard]] std::size_t record_bytes() const {
    return header_bytes + crypto_overhead_bytes + sensors * summary_bytes_per_channel;
  }
  [[nodiscard]] std::size_t control_bytes() const { return header_bytes; }
};

// Raw sample bytes one node accumulates at `samples_per_hour`.
[[nodiscard]] std::size_t raw_bytes_per_hour(const PacketFormat& format,
                                             std::size_t samples_per_hour = 60);

// One sampling of every sensor on a node.
struct SensorReading {
  NodeId node;
  std::uint64_t round = 0;
  std::vector<float> values;  // one per sensor channel
};

// Deterministic synthetic environment: a per-channel baseline, a slow
// diurnal swing and hashed per-node noise. Stateless, so the value does not
// depend on the order in which nodes sample.
class SensorModel {
 public:
  SensorModel(std::uint64_t seed, std::size_t channels);

  [[nodiscard]] SensorReading sample(NodeId node, std::uint64_t round) const;

 private:
  std::uint64_t seed_;
  std::size_t channels_;
};

struct ChannelSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::uint32_t count = 0;

  friend bool operator==(const ChannelSummary&, const ChannelSummary&) = default;
};

struct RecordKey {
  CellId cell;
  std::uint64_t round = 0;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

struct AggregateRecord {
  CellId origin_cell;
  std::uint64_t round = 0;
  std::vector<ChannelSummary> channels;
  std::uint32_t source_count = 0;
  std::size_t size_bytes = 0;
  // Cell records folded into this one. Simulation bookkeeping, not counted
  // in size_bytes.
  std::vector<RecordKey> provenance;
};

// Per-channel mean/min/max/count over the given readings. source_count is
// the number of distinct reporting nodes.
[[nodiscard]] AggregateRecord aggregate_readings(CellId origin, std::uint64_t round,
                                                 std::span<const SensorReading> readings,
                                                 const PacketFormat& format);

// Combines records into one, weighting means by counts and uniting
// provenance (sorted, deduplicated).
[[nodiscard]] AggregateRecord merge_records(CellId origin, std::uint64_t round,
                                            std::span<const AggregateRecord> records,
                                            const PacketFormat& format);

}  // namespace sidle
