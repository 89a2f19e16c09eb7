#include "sidle/event_queue.hpp"

#include <string>

#include "sidle/errors.hpp"

namespace sidle {

std::uint64_t EventQueue::schedule(SimTime fire_time, EventPayload payload) {
  if (fire_time < now_) {
    throw ContractViolation("schedule: fire time " + std::to_string(fire_time) +
                            " is before the clock " + std::to_string(now_));
  }
  const std::uint64_t seq = next_sequence_++;
  heap_.push(Event{fire_time, seq, std::move(payload)});
  return seq;
}

std::optional<Event> EventQueue::pop() {
  if (heap_.empty()) return std::nullopt;
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.fire_time;
  return ev;
}

std::optional<SimTime> EventQueue::next_time() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.top().fire_time;
}

}  // namespace sidle
