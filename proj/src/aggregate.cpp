#include "sidle/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "sidle/errors.hpp"
#include "sidle/rng.hpp"

namespace sidle {

void PacketFormat::validate() const {
  if (sensors == 0) throw ConfigError("data.sensors", "must be at least 1");
  if (bytes_per_reading == 0) {
    throw ConfigError("data.bytes_per_reading", "must be at least 1");
  }
  if (record_bytes() > kMaxRecordBytes) {
    throw ConfigError("data", "aggregate record would exceed 250 bytes");
  }
}

std::size_t raw_bytes_per_hour(const PacketFormat& format,
                               std::size_t samples_per_hour) {
  return samples_per_hour * format.reading_bytes();
}

SensorModel::SensorModel(std::uint64_t seed, std::size_t channels)
    : seed_(derive_stream_seed(seed, stream::kSensor)), channels_(channels) {}

SensorReading SensorModel::sample(NodeId node, std::uint64_t round) const {
  SensorReading r;
  r.node = node;
  r.round = round;
  r.values.reserve(channels_);
  const double phase =
      2.0 * std::numbers::pi * static_cast<double>(round % 1440) / 1440.0;
  for (std::size_t c = 0; c < channels_; ++c) {
    std::uint64_t h = seed_ ^ (static_cast<std::uint64_t>(node.value) << 32) ^
                      (round * 0x9e3779b97f4a7c15ULL) ^ (c * 0xc2b2ae3d27d4eb4fULL);
    h = (h ^ (h >> 33)) * 0xff51afd7ed558ccdULL;
    h = (h ^ (h >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    const double noise = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
    const double base = 10.0 * static_cast<double>(c + 1);
    r.values.push_back(static_cast<float>(base + 2.0 * std::sin(phase) + noise));
  }
  return r;
}

AggregateRecord aggregate_readings(CellId origin, std::uint64_t round,
                                   std::span<const SensorReading> readings,
                                   const PacketFormat& format) {
  AggregateRecord rec;
  rec.origin_cell = origin;
  rec.round = round;
  rec.size_bytes = format.record_bytes();
  rec.channels.assign(format.sensors, ChannelSummary{});
  std::vector<double> sums(format.sensors, 0.0);
  std::set<NodeId> sources;
  for (const SensorReading& r : readings) {
    sources.insert(r.node);
    for (std::size_t c = 0; c < format.sensors && c < r.values.size(); ++c) {
      const double v = r.values[c];
      ChannelSummary& s = rec.channels[c];
      if (s.count == 0) {
        s.min = v;
        s.max = v;
      } else {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
      }
      sums[c] += v;
      ++s.count;
    }
  }
  for (std::size_t c = 0; c < format.sensors; ++c) {
    ChannelSummary& s = rec.channels[c];
    s.mean = s.count > 0 ? sums[c] / s.count : 0.0;
  }
  rec.source_count = static_cast<std::uint32_t>(sources.size());
  rec.provenance.push_back({origin, round});
  return rec;
}

AggregateRecord merge_records(CellId origin, std::uint64_t round,
                              std::span<const AggregateRecord> records,
                              const PacketFormat& format) {
  AggregateRecord rec;
  rec.origin_cell = origin;
  rec.round = round;
  rec.size_bytes = format.record_bytes();
  rec.channels.assign(format.sensors, ChannelSummary{});
  std::vector<double> weighted(format.sensors, 0.0);
  for (const AggregateRecord& in : records) {
    rec.source_count += in.source_count;
    for (std::size_t c = 0; c < format.sensors && c < in.channels.size(); ++c) {
      const ChannelSummary& s = in.channels[c];
      if (s.count == 0) continue;
      ChannelSummary& out = rec.channels[c];
      if (out.count == 0) {
        out.min = s.min;
        out.max = s.max;
      } else {
        out.min = std::min(out.min, s.min);
        out.max = std::max(out.max, s.max);
      }
      weighted[c] += s.mean * s.count;
      out.count += s.count;
    }
    rec.provenance.insert(rec.provenance.end(), in.provenance.begin(),
                          in.provenance.end());
  }
  for (std::size_t c = 0; c < format.sensors; ++c) {
    ChannelSummary& s = rec.channels[c];
    s.mean = s.count > 0 ? weighted[c] / s.count : 0.0;
  }
  std::sort(rec.provenance.begin(), rec.provenance.end());
  rec.provenance.erase(std::unique(rec.provenance.begin(), rec.provenance.end()),
                       rec.provenance.end());
  return rec;
}

}  // namespace sidle
