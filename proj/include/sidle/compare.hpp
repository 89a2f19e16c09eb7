#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sidle/metrics.hpp"

namespace sidle {

struct ProtocolSummary {
  std::string name;
  std::vector<MetricsSample> mean_series;  // per-round mean over seeds
  std::vector<double> final_mean_residual;  // per seed
  // First node death per seed; absent when every node survived.
  std::vector<std::optional<std::uint64_t>> first_death;
  // Last round with any record reaching the base, per seed. A protocol that
  // stops delivering stops spending, so read final residuals against this.
  std::vector<std::optional<std::uint64_t>> last_delivery;
};

struct PairwiseOrdering {
  std::string a;
  std::string b;
  // Fraction of seeds where a ends with more mean residual than b, ties
  // counting half.
  double fraction = 0.0;
};

struct ComparisonReport {
  std::vector<std::uint64_t> seeds;
  std::vector<ProtocolSummary> protocols;  // in request order
  std::vector<PairwiseOrdering> orderings; // every ordered pair, a != b by position

  [[nodiscard]] const ProtocolSummary& summary(const std::string& name) const;
  [[nodiscard]] double ordering(const std::string& a, const std::string& b) const;
};

// Runs every (protocol, seed) pair on one shared topology. The topology seed
// comes from config.topology.seed; the run seed varies.
[[nodiscard]] ComparisonReport compare_protocols(const ScenarioConfig& config,
                                                 const std::vector<ProtocolKind>& protocols,
                                                 const std::vector<std::uint64_t>& seeds);

[[nodiscard]] std::string report_json(const ScenarioConfig& config,
                                      const ComparisonReport& report);
[[nodiscard]] SeriesSet report_series(const ComparisonReport& report);

}  // namespace sidle
