#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sidle/event_queue.hpp"
#include "sidle/network.hpp"

namespace sidle {

// Frame timing shared by every protocol, so that radio-on time is charged on
// equal terms.
struct FrameTiming {
  SimTime slot_ms = 20;             // one TDMA slot per member report
  SimTime listen_window_ms = 50;    // control traffic per round (claims, adverts)

  void validate() const;
};

// Charges the active-minus-sleep power for `ms` of radio-on time; the
// simulation already charges sleep power for the whole round.
DrainOutcome charge_active(Network& net, NodeId node, const DutyCostModel& duty, SimTime ms);

// Counters a protocol accumulates during one round.
struct RoundReport {
  std::uint64_t records_delivered = 0;
  std::uint64_t elections_held = 0;
};

// Clustering protocol driven by the simulation's event loop. The simulation
// owns the clock, the radio and the batteries; a protocol only reacts.
class Protocol {
 public:
  virtual ~Protocol() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;

  // Round boundary at net.now(). The protocol schedules the round's work.
  virtual void begin_round(Network& net, std::uint64_t round) = 0;
  virtual void on_timer(Network& net, const TimerEvent& timer) = 0;
  virtual void on_arrival(Network& net, const ArrivalEvent& arrival) = 0;
  // Called after a scripted failure has been applied to the network.
  virtual void on_failure(Network& /*net*/, const NodeFailureEvent& /*failure*/) {}
  virtual void end_round(Network& /*net*/, std::uint64_t /*round*/) {}

  // Counters since the previous call.
  virtual RoundReport take_report() = 0;
  // Broken protocol invariants, empty when all hold.
  [[nodiscard]] virtual std::vector<std::string> check_invariants(const Network& /*net*/) const {
    return {};
  }
};

}  // namespace sidle
