#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sidle/ids.hpp"

namespace sidle {

// Endpoint column values that are not node ids.
inline constexpr std::int64_t kTraceNone = -3;
inline constexpr std::int64_t kTraceBase = -2;
inline constexpr std::int64_t kTraceBroadcast = -1;

struct TraceRecord {
  SimTime time = 0;
  std::string_view kind;  // static strings only
  std::int64_t src = kTraceNone;
  std::int64_t dst = kTraceNone;
  std::size_t bytes = 0;
  std::string_view outcome;
};

// Event trace, one row per send attempt or protocol event. Collects nothing
// when disabled.
class Trace {
 public:
  explicit Trace(bool enabled = false) : enabled_(enabled) {}

  void record(SimTime time, std::string_view kind, std::int64_t src, std::int64_t dst,
              std::size_t bytes, std::string_view outcome) {
    if (enabled_) records_.push_back({time, kind, src, dst, bytes, outcome});
  }
  void note(SimTime time, std::string_view kind, NodeId src,
            std::int64_t dst = kTraceNone, std::string_view outcome = "ok") {
    record(time, kind, src.valid() ? static_cast<std::int64_t>(src.value) : kTraceNone,
           dst, 0, outcome);
  }

  [[nodiscard]] bool enabled() const { return enabled_; }
  [[nodiscard]] const std::vector<TraceRecord>& records() const { return records_; }
  [[nodiscard]] std::string to_csv() const;

 private:
  bool enabled_;
  std::vector<TraceRecord> records_;
};

[[nodiscard]] std::int64_t trace_id(NodeId id);

}  // namespace sidle
