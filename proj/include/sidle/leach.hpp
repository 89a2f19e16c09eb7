#pragma once

#include <cstdint>
#include <vector>

#include "sidle/ids.hpp"
#include "sidle/rng.hpp"

namespace sidle {

// Rounds per epoch, ceil(1/p).
[[nodiscard]] std::uint64_t leach_epoch_length(double p);

// T(n) = p / (1 - p * (r mod ceil(1/p))) for nodes still in G, else 0.
// Clamped to at most 1. Throws ConfigError unless 0 < p <= 1.
[[nodiscard]] double leach_threshold(double p, std::uint64_t round, bool eligible);

// The set G of nodes that have not yet served as cluster head this epoch.
class LeachState {
 public:
  LeachState(std::size_t nodes, double p);

  // Every live eligible node draws uniform [0, 1) in id order; draws below
  // T(n) self-elect and leave G. G refills at each epoch boundary.
  std::vector<NodeId> elect(std::uint64_t round, const std::vector<bool>& alive,
                            RngStream& rng);

  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] bool eligible(NodeId n) const { return eligible_[n.index()]; }

 private:
  double p_;
  std::uint64_t epoch_;
  std::vector<bool> eligible_;
};

}  // namespace sidle
