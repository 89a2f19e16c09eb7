#include "sidle/election.hpp"

#include <algorithm>

#include "sidle/errors.hpp"

namespace sidle {

void ElectionParams::validate() const {
  if (delay_max_ms < 0) throw ConfigError("sidle.delay_max_ms", "must be >= 0");
  if (restart_delay_max_ms < 1) {
    throw ConfigError("sidle.restart_delay_max_ms", "must be >= 1");
  }
  if (max_restarts < 1) throw ConfigError("sidle.max_restarts", "must be >= 1");
}

SimTime propose_election_delay(RngStream& rng, SimTime delay_max_ms) {
  if (delay_max_ms < 0) throw ContractViolation("propose_election_delay: negative range");
  return rng.uniform_int(0, delay_max_ms);
}

ElectionResult run_cell_election(std::span<const NodeId> candidates,
                                 const DelayProposer& propose,
                                 const ElectionParams& params) {
  if (candidates.empty()) throw CellExtinct("election with no live candidates");

  ElectionResult result;
  std::vector<NodeId> contenders(candidates.begin(), candidates.end());
  std::sort(contenders.begin(), contenders.end());

  for (int attempt = 0;; ++attempt) {
    if (contenders.size() == 1) {
      result.leader = contenders.front();
      break;
    }
    const SimTime range = (attempt == 0 || params.delay_max_ms > 0)
                              ? params.delay_max_ms
                              : params.restart_delay_max_ms;
    ElectionAttempt round;
    SimTime minimum = 0;
    for (NodeId n : contenders) {
      const SimTime d = propose(n, attempt, range);
      if (round.proposals.empty() || d < minimum) minimum = d;
      round.proposals.emplace_back(n, d);
    }
    result.claim_delay_ms += minimum;
    std::vector<NodeId> tied;
    for (const auto& [n, d] : round.proposals) {
      if (d == minimum) tied.push_back(n);
    }
    result.attempts.push_back(std::move(round));
    contenders = std::move(tied);
    if (contenders.size() == 1) {
      result.leader = contenders.front();
      break;
    }
    if (result.restarts == params.max_restarts) {
      result.leader = contenders.front();
      result.forced_tiebreak = true;
      break;
    }
    ++result.restarts;
  }
  return result;
}

ElectionResult run_cell_election(std::span<const NodeId> candidates, RngStream& rng,
                                 const ElectionParams& params) {
  return run_cell_election(
      candidates,
      [&rng](NodeId, int, SimTime range) { return propose_election_delay(rng, range); },
      params);
}

}  // namespace sidle
