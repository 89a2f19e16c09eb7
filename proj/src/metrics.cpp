#include "sidle/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sidle/errors.hpp"

namespace sidle {

namespace {

std::string valid_columns() {
  std::string out;
  for (const char* c : kMetricsColumns) {
    if (!out.empty()) out += ", ";
    out += c;
  }
  return out;
}

std::uint64_t parse_u64(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  try {
    const unsigned long long v = std::stoull(field, &used);
    if (used == field.size() && field.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("csv", "line " + std::to_string(line) + ": bad integer '" + field + "'");
}

double parse_double(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  try {
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("csv", "line " + std::to_string(line) + ": bad number '" + field + "'");
}

}  // namespace

std::string metrics_csv(std::span<const MetricsSample> series) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kMetricsColumns); ++i) {
    if (i) out += ',';
    out += kMetricsColumns[i];
  }
  out += '\n';
  char buf[256];
  for (const MetricsSample& s : series) {
    std::snprintf(buf, sizeof buf,
                  "%" PRIu64 ",%.6f,%.6f,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n",
                  s.round, s.total_residual, s.mean_residual, s.alive_count,
                  s.records_delivered, s.elections_held, s.bytes_on_air);
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

void export_csv(std::span<const MetricsSample> series, const std::string& path) {
  write_text_file(path, metrics_csv(series));
}

std::vector<MetricsSample> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "missing header");
  std::string header;
  for (std::size_t i = 0; i < std::size(kMetricsColumns); ++i) {
    if (i) header += ',';
    header += kMetricsColumns[i];
  }
  if (line != header) throw ConfigError("csv", "unexpected header '" + line + "'");
  std::vector<MetricsSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.push_back(cell);
    if (f.size() != std::size(kMetricsColumns)) {
      throw ConfigError("csv", "line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(std::size(kMetricsColumns)) + " fields");
    }
    MetricsSample s;
    s.round = parse_u64(f[0], lineno);
    s.total_residual = parse_double(f[1], lineno);
    s.mean_residual = parse_double(f[2], lineno);
    s.alive_count = parse_u64(f[3], lineno);
    s.records_delivered = parse_u64(f[4], lineno);
    s.elections_held = parse_u64(f[5], lineno);
    s.bytes_on_air = parse_u64(f[6], lineno);
    out.push_back(s);
  }
  return out;
}

double metric_value(const MetricsSample& s, const std::string& column) {
  if (column == "round") return static_cast<double>(s.round);
  if (column == "total_residual") return s.total_residual;
  if (column == "mean_residual") return s.mean_residual;
  if (column == "alive_count") return static_cast<double>(s.alive_count);
  if (column == "records_delivered") return static_cast<double>(s.records_delivered);
  if (column == "elections_held") return static_cast<double>(s.elections_held);
  if (column == "bytes_on_air") return static_cast<double>(s.bytes_on_air);
  throw ConfigError("plot.column", (column.empty() ? std::string("empty column name")
                                                   : "unknown column '" + column + "'") +
                                       "; valid columns: " + valid_columns());
}

}  // namespace sidle
