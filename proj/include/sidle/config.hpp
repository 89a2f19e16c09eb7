#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sidle/aggregate.hpp"
#include "sidle/baselines.hpp"
#include "sidle/energy.hpp"
#include "sidle/event_queue.hpp"
#include "sidle/network.hpp"
#include "sidle/protocol.hpp"
#include "sidle/sidle_protocol.hpp"
#include "sidle/topology.hpp"

namespace sidle {

enum class ProtocolKind : std::uint8_t { Sidle, Leach, Fca };

[[nodiscard]] std::string_view to_string(ProtocolKind kind);
// Throws ConfigError("protocol", ...) for unknown names.
[[nodiscard]] ProtocolKind parse_protocol(std::string_view name);

struct FailureSpec {
  std::uint64_t round = 0;
  SimTime offset_ms = 0;  // into the round
  NodeId node;
  FailureAction action = FailureAction::Kill;
};

struct EnergyConfig {
  double initial_j = 5.0;
  std::optional<double> head_initial_j;  // sophisticated nodes; defaults to initial_j
  double harvest_rate_w = 0.0;           // peak; 0 disables harvesting
  std::uint64_t day_rounds = 1440;       // rounds per simulated day
  DutyCostModel duty;
  bool audit = false;                    // keep a per-change audit log
};

// Everything a run depends on. A config plus its seed fixes a run bit for bit.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint64_t rounds = 1000;
  ProtocolKind protocol = ProtocolKind::Sidle;
  SimTime round_period_ms = 60000;  // one sensor reading per minute
  bool check_invariants = true;

  // 100 nodes over two clusters unless a config says otherwise.
  TopologyConfig topology = [] {
    TopologyConfig t;
    t.node_count = 100;
    return t;
  }();
  std::optional<std::string> topology_file;  // load instead of generating
  EnergyConfig energy;
  NetworkParams radio;
  PacketFormat packet;
  FrameTiming timing;

  SidleParams sidle;
  LeachParams leach;
  double fca_degree_max = 20.0;
  double fca_cluster_range_m = 150.0;
  std::optional<std::string> fca_rules_file;

  std::vector<FailureSpec> failures;
  std::vector<Command> commands;

  void validate() const;
};

[[nodiscard]] ScenarioConfig default_config();

// Reads a JSON config layered over the defaults. Unknown keys and bad values
// raise ConfigError naming the key. Relative file references resolve
// against base_dir.
[[nodiscard]] ScenarioConfig config_from_json(const std::string& text,
                                              const std::string& base_dir = "");
[[nodiscard]] std::string config_to_json(const ScenarioConfig& config);
[[nodiscard]] ScenarioConfig load_config(const std::string& path);

[[nodiscard]] FcaParams fca_params(const ScenarioConfig& config);

}  // namespace sidle
