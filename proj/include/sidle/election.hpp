#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sidle/ids.hpp"
#include "sidle/rng.hpp"

namespace sidle {

struct ElectionParams {
  SimTime delay_max_ms = 1023;
  // Range used for redraws when delay_max_ms is 0, so a forced full tie
  // can still be broken.
  SimTime restart_delay_max_ms = 1023;
  // After this many consecutive ties the lowest tied id wins outright.
  int max_restarts = 64;

  void validate() const;
};

// Uniform integer delay in [0, delay_max] from the election-delay stream.
[[nodiscard]] SimTime propose_election_delay(RngStream& rng, SimTime delay_max_ms);

struct ElectionAttempt {
  std::vector<std::pair<NodeId, SimTime>> proposals;
};

struct ElectionResult {
  NodeId leader;
  int restarts = 0;
  // Time from the opening of the window until the winner's claim: the sum
  // of the minimum delay of every attempt.
  SimTime claim_delay_ms = 0;
  bool forced_tiebreak = false;
  std::vector<ElectionAttempt> attempts;
};

// Proposal source: (node, attempt index, range) -> delay.
using DelayProposer = std::function<SimTime(NodeId, int, SimTime)>;

// Random-delay election. Every candidate proposes a delay; a unique minimum
// wins; when several share the minimum, only those redraw.
// Throws CellExtinct when there are no candidates.
[[nodiscard]] ElectionResult run_cell_election(std::span<const NodeId> candidates,
                                               const DelayProposer& propose,
                                               const ElectionParams& params);
[[nodiscard]] ElectionResult run_cell_election(std::span<const NodeId> candidates,
                                               RngStream& rng,
                                               const ElectionParams& params);

}  // namespace sidle
