#pragma once

#include "sidle/message.hpp"
#include "sidle/topology.hpp"

namespace sidle {

// Log-distance path loss for one transmit power tier.
struct PathLossParams {
  double p0_dbm = -40.0;  // received power at the 1 m reference distance
  double exponent = 2.7;
  double sensitivity_dbm = -100.0;
  double range_m = 200.0;  // line-of-sight limit of the radio class

  void validate(const char* key) const;
};

struct RadioProfile {
  PathLossParams low{-40.0, 2.7, -100.0, 200.0};
  PathLossParams boosted{-28.0, 2.7, -100.0, 400.0};
  PathLossParams high{-18.0, 2.7, -100.0, 1000.0};

  [[nodiscard]] const PathLossParams& at(PowerLevel level) const;
  void validate() const;
};

// rssi = P0 - 10 * eta * log10(d / 1 m). Distances under 1 m read as P0.
[[nodiscard]] double rssi_at_distance(double distance_m, const PathLossParams& params);
[[nodiscard]] double rssi(const Position& src, const Position& dst,
                          const PathLossParams& params);

// Linear map of [sensitivity, P0] onto 0..10, floored and clamped.
[[nodiscard]] int normalized_ss(double rssi_dbm, const PathLossParams& params);

enum class DeliveryOutcome : std::uint8_t {
  Delivered,
  OutOfRange,
  BelowSensitivity,
  Lost,
  ReceiverDead,
  NotListening,
  SenderDead,
};

[[nodiscard]] std::string_view to_string(DeliveryOutcome outcome);

// Physical-layer verdict for one sender/receiver pair. loss_draw is a
// uniform [0, 1) sample; the link survives when it is >= loss_probability.
[[nodiscard]] DeliveryOutcome link_verdict(const Position& src, const Position& dst,
                                           const PathLossParams& params,
                                           double loss_probability, double loss_draw);

}  // namespace sidle
