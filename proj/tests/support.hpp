#pragma once

#include <string>

#include "sidle/config.hpp"
#include "sidle/runner.hpp"
#include "sidle/sidle_protocol.hpp"

namespace sidle::testing {

inline ScenarioConfig scenario(std::uint64_t rounds, std::uint64_t seed = 1) {
  ScenarioConfig c = default_config();
  c.rounds = rounds;
  c.seed = seed;
  return c;
}

// One 7-cell cluster with a fixed number of nodes per cell.
inline ScenarioConfig one_cluster(std::uint64_t rounds, std::uint32_t per_cell = 7) {
  ScenarioConfig c = scenario(rounds);
  c.topology.clusters = 1;
  c.topology.node_count.reset();
  c.topology.nodes_per_cell = per_cell;
  return c;
}

inline SidleProtocol& sidle_of(Simulation& sim) {
  return dynamic_cast<SidleProtocol&>(sim.protocol());
}

inline void run_until(Simulation& sim, std::uint64_t rounds) {
  while (sim.series().size() < rounds) (void)sim.step();
}

inline bool leads(Role r) {
  return r == Role::Leader || r == Role::HeadCluster || r == Role::Master ||
         r == Role::Refugee;
}

inline std::string source_path(const std::string& rel) {
  return std::string(SIDLE_SOURCE_DIR) + "/" + rel;
}

}  // namespace sidle::testing
