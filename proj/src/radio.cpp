#include "sidle/radio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sidle/errors.hpp"

namespace sidle {

void PathLossParams::validate(const char* key) const {
  const std::string k(key);
  if (!(exponent > 0.0)) throw ConfigError(k + ".exponent", "must be > 0");
  if (!(sensitivity_dbm < p0_dbm)) {
    throw ConfigError(k + ".sensitivity_dbm", "must be below p0_dbm");
  }
  if (!(range_m > 0.0)) throw ConfigError(k + ".range_m", "must be > 0");
}

const PathLossParams& RadioProfile::at(PowerLevel level) const {
  switch (level) {
    case PowerLevel::Low: return low;
    case PowerLevel::Boosted: return boosted;
    case PowerLevel::High: return high;
  }
  return low;
}

void RadioProfile::validate() const {
  low.validate("radio.low");
  boosted.validate("radio.boosted");
  high.validate("radio.high");
}

double rssi_at_distance(double distance_m, const PathLossParams& params) {
  const double d = std::max(distance_m, 1.0);
  return params.p0_dbm - 10.0 * params.exponent * std::log10(d);
}

double rssi(const Position& src, const Position& dst, const PathLossParams& params) {
  return rssi_at_distance(distance(src, dst), params);
}

int normalized_ss(double rssi_dbm, const PathLossParams& params) {
  const double span = params.p0_dbm - params.sensitivity_dbm;
  if (!(span > 0.0)) return 0;
  const double level = std::floor(10.0 * (rssi_dbm - params.sensitivity_dbm) / span);
  return static_cast<int>(std::clamp(level, 0.0, 10.0));
}

std::string_view to_string(DeliveryOutcome outcome) {
  switch (outcome) {
    case DeliveryOutcome::Delivered: return "delivered";
    case DeliveryOutcome::OutOfRange: return "out-of-range";
    case DeliveryOutcome::BelowSensitivity: return "below-sensitivity";
    case DeliveryOutcome::Lost: return "lost";
    case DeliveryOutcome::ReceiverDead: return "receiver-dead";
    case DeliveryOutcome::NotListening: return "not-listening";
    case DeliveryOutcome::SenderDead: return "sender-dead";
  }
  return "unknown";
}

DeliveryOutcome link_verdict(const Position& src, const Position& dst,
                             const PathLossParams& params, double loss_probability,
                             double loss_draw) {
  const double d = distance(src, dst);
  if (d > params.range_m) return DeliveryOutcome::OutOfRange;
  if (rssi_at_distance(d, params) < params.sensitivity_dbm) {
    return DeliveryOutcome::BelowSensitivity;
  }
  if (loss_draw < loss_probability) return DeliveryOutcome::Lost;
  return DeliveryOutcome::Delivered;
}

}  // namespace sidle
