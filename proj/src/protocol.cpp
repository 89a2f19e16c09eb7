#include "sidle/protocol.hpp"

#include "sidle/errors.hpp"

namespace sidle {

void FrameTiming::validate() const {
  if (slot_ms < 1) throw ConfigError("timing.slot_ms", "must be >= 1");
  if (listen_window_ms < 0) throw ConfigError("timing.listen_window_ms", "must be >= 0");
}

DrainOutcome charge_active(Network& net, NodeId node, const DutyCostModel& duty, SimTime ms) {
  const double watts = duty.active_power_w - duty.sleep_power_w;
  if (ms <= 0 || watts <= 0.0) {
    return net.alive(node) ? DrainOutcome::Alive : DrainOutcome::Dead;
  }
  return net.charge(node, watts * static_cast<double>(ms) / 1000.0, EnergyCause::Duty);
}

}  // namespace sidle
