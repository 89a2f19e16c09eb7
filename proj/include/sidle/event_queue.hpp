#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "sidle/ids.hpp"
#include "sidle/message.hpp"

namespace sidle {

struct TimerEvent {
  NodeId node;  // invalid for protocol-wide timers
  int tag = 0;
  std::uint64_t cookie = 0;
};

struct ArrivalEvent {
  NodeId receiver;
  Message message;
};

struct RoundBoundaryEvent {
  std::uint64_t round = 0;
};

enum class FailureAction : std::uint8_t { Kill, Reset };

struct NodeFailureEvent {
  NodeId node;
  FailureAction action = FailureAction::Kill;
};

using EventPayload =
    std::variant<TimerEvent, ArrivalEvent, RoundBoundaryEvent, NodeFailureEvent>;

enum class EventKind : std::uint8_t { Timer, MessageArrival, RoundBoundary, NodeFailure };

struct Event {
  SimTime fire_time = 0;
  std::uint64_t sequence = 0;
  EventPayload payload;

  [[nodiscard]] EventKind kind() const {
    return static_cast<EventKind>(payload.index());
  }
};

// Simulation clock plus pending events, dequeued in (fire_time, sequence)
// order. Sequence numbers are handed out at schedule time, so events at the
// same instant fire first-in first-out.
class EventQueue {
 public:
  // Throws ContractViolation when fire_time lies before the current clock.
  std::uint64_t schedule(SimTime fire_time, EventPayload payload);

  // Pops the earliest event and advances the clock to its fire time.
  std::optional<Event> pop();
  [[nodiscard]] std::optional<SimTime> next_time() const;

  [[nodiscard]] SimTime now() const { return now_; }
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.sequence > b.sequence;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
};

}  // namespace sidle
