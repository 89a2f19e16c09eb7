#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sidle/runner.hpp"

namespace sidle {

inline constexpr const char* kMetricsColumns[] = {
    "round",          "total_residual", "mean_residual", "alive_count",
    "records_delivered", "elections_held", "bytes_on_air"};

// Header plus one row per sample; doubles with six decimals.
[[nodiscard]] std::string metrics_csv(std::span<const MetricsSample> series);
void export_csv(std::span<const MetricsSample> series, const std::string& path);
// Inverse of metrics_csv. Throws ConfigError on a malformed table.
[[nodiscard]] std::vector<MetricsSample> parse_csv(const std::string& text);

// Value of one named column; throws ConfigError listing the valid names.
[[nodiscard]] double metric_value(const MetricsSample& sample, const std::string& column);

using SeriesSet = std::map<std::string, std::vector<MetricsSample>>;

// Static SVG of `column` against round, one polyline per series.
[[nodiscard]] std::string render_plot(const SeriesSet& series, const std::string& column);
void emit_plot(const SeriesSet& series, const std::string& column, const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace sidle
