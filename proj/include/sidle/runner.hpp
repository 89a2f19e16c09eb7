#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sidle/config.hpp"

namespace sidle {

struct MetricsSample {
  std::uint64_t round = 0;
  double total_residual = 0.0;  // J
  double mean_residual = 0.0;   // J, over every node including dead ones
  std::uint64_t alive_count = 0;
  std::uint64_t records_delivered = 0;
  std::uint64_t elections_held = 0;
  std::uint64_t bytes_on_air = 0;  // this round

  friend bool operator==(const MetricsSample&, const MetricsSample&) = default;
};

[[nodiscard]] Topology build_topology(const ScenarioConfig& config);

[[nodiscard]] std::unique_ptr<Protocol> make_protocol(const ScenarioConfig& config,
                                                      Network& net);

// One scenario from start to finish. Owns the topology, batteries, clock,
// radio and protocol.
class Simulation {
 public:
  Simulation(ScenarioConfig config, Topology topology, bool trace);
  explicit Simulation(const ScenarioConfig& config, bool trace = false);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Plays one round and returns its sample. Throws InvariantViolation when
  // the protocol reports a broken invariant.
  const MetricsSample& step();
  void run();

  [[nodiscard]] bool finished() const { return next_round_ >= config_.rounds; }
  [[nodiscard]] const std::vector<MetricsSample>& series() const { return series_; }
  [[nodiscard]] std::optional<std::uint64_t> first_death_round() const {
    return first_death_;
  }

  [[nodiscard]] const ScenarioConfig& config() const { return config_; }
  [[nodiscard]] const Topology& topology() const { return topology_; }
  [[nodiscard]] const EnergyLedger& ledger() const { return ledger_; }
  [[nodiscard]] const Network& network() const { return net_; }
  [[nodiscard]] Network& network() { return net_; }
  [[nodiscard]] const Trace& trace() const { return trace_; }
  [[nodiscard]] Protocol& protocol() { return *protocol_; }
  [[nodiscard]] const Protocol& protocol() const { return *protocol_; }

 private:
  void dispatch(const Event& event);
  void on_boundary(std::uint64_t round);
  [[nodiscard]] std::string trace_tail(std::size_t rows) const;

  ScenarioConfig config_;
  Topology topology_;
  EnergyLedger ledger_;
  EventQueue queue_;
  Trace trace_;
  Network net_;
  std::unique_ptr<Protocol> protocol_;

  std::uint64_t next_round_ = 0;
  std::uint64_t bytes_before_ = 0;
  std::vector<MetricsSample> series_;
  std::optional<std::uint64_t> first_death_;
};

struct RunResult {
  std::vector<MetricsSample> series;
  std::string trace_csv;  // empty unless tracing was requested
  std::string audit_csv;  // empty unless energy.audit is set
  std::optional<std::uint64_t> first_death_round;
};

[[nodiscard]] RunResult run_scenario(const ScenarioConfig& config, bool trace = false);
[[nodiscard]] RunResult run_scenario(const ScenarioConfig& config, const Topology& topology,
                                     bool trace = false);

}  // namespace sidle
