#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sidle/errors.hpp"
#include "sidle/metrics.hpp"

namespace sidle {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 500;
constexpr double kLeft = 80;
constexpr double kRight = 170;  // legend column
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

const char* unit_of(const std::string& column) {
  if (column == "total_residual" || column == "mean_residual") return "J";
  if (column == "alive_count") return "nodes";
  if (column == "records_delivered") return "records";
  if (column == "elections_held") return "elections";
  if (column == "bytes_on_air") return "bytes";
  return "index";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plot(const SeriesSet& series, const std::string& column) {
  if (series.empty()) throw ConfigError("plot", "no series to plot");
  const std::size_t n = series.begin()->second.size();
  for (const auto& [name, s] : series) {
    if (s.size() != n) {
      throw ConfigError("plot", "series '" + name + "' has " + std::to_string(s.size()) +
                                    " samples, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i].round != series.begin()->second[i].round) {
        throw ConfigError("plot", "series '" + name + "' does not share round indexing");
      }
    }
  }
  // Validates the column even for empty series.
  (void)metric_value(MetricsSample{}, column);

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (n > 0) {
    x0 = static_cast<double>(series.begin()->second.front().round);
    x1 = static_cast<double>(series.begin()->second.back().round);
    y0 = y1 = metric_value(series.begin()->second.front(), column);
    for (const auto& [name, s] : series) {
      for (const MetricsSample& m : s) {
        const double v = metric_value(m, column);
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
    }
    y0 = std::min(y0, 0.0);
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x0 + (x1 - x0) * i / kTicks;
    const double yv = y0 + (y1 - y0) * i / kTicks;
    out += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" +
           num(px(xv)) + "\" y2=\"" + num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + ph + 20) +
           "\" text-anchor=\"middle\">" + label(std::round(xv)) + "</text>\n";
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(py(yv)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\">" + label(yv) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) +
         "\" text-anchor=\"middle\">round (index)</text>\n";
  out += "<text x=\"20\" y=\"" + num(kTop + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " + num(kTop + ph / 2) + ")\">" +
         escape(column) + " (" + unit_of(column) + ")</text>\n";

  std::size_t k = 0;
  for (const auto& [name, s] : series) {
    const char* color = kPalette[k % std::size(kPalette)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ' ';
      out += num(px(static_cast<double>(s[i].round))) + "," + num(py(metric_value(s[i], column)));
    }
    out += "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    const double lx = kWidth - kRight + 15;
    out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 25) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly + 4) + "\">" + escape(name) +
           "</text>\n";
    ++k;
  }
  out += "</g>\n</svg>\n";
  return out;
}

void emit_plot(const SeriesSet& series, const std::string& column, const std::string& path) {
  write_text_file(path, render_plot(series, column));
}

}  // namespace sidle
