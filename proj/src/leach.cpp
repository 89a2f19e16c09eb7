#include "sidle/leach.hpp"

#include <algorithm>
#include <cmath>

#include "sidle/errors.hpp"

namespace sidle {

namespace {

void check_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("leach.p", "must lie in (0, 1]");
}

}  // namespace

std::uint64_t leach_epoch_length(double p) {
  check_p(p);
  return static_cast<std::uint64_t>(std::ceil(1.0 / p));
}

double leach_threshold(double p, std::uint64_t round, bool eligible) {
  const std::uint64_t epoch = leach_epoch_length(p);
  if (!eligible) return 0.0;
  const double denom = 1.0 - p * static_cast<double>(round % epoch);
  // At the epoch's last round denom equals p in exact arithmetic; allow for
  // the rounding in p * (epoch - 1).
  if (denom <= p * (1.0 + 1e-9)) return 1.0;
  return std::min(1.0, p / denom);
}

LeachState::LeachState(std::size_t nodes, double p)
    : p_(p), epoch_(leach_epoch_length(p)), eligible_(nodes, true) {}

std::vector<NodeId> LeachState::elect(std::uint64_t round, const std::vector<bool>& alive,
                                      RngStream& rng) {
  if (alive.size() != eligible_.size()) {
    throw ContractViolation("LeachState::elect: liveness vector size mismatch");
  }
  if (round % epoch_ == 0) std::fill(eligible_.begin(), eligible_.end(), true);
  std::vector<NodeId> heads;
  for (std::size_t i = 0; i < eligible_.size(); ++i) {
    if (!alive[i] || !eligible_[i]) continue;
    const double t = leach_threshold(p_, round, true);
    if (rng.uniform01() < t) {
      heads.push_back(NodeId{static_cast<std::uint32_t>(i)});
      eligible_[i] = false;
    }
  }
  return heads;
}

}  // namespace sidle
