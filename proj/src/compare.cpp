#include "sidle/compare.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "sidle/errors.hpp"

namespace sidle {

const ProtocolSummary& ComparisonReport::summary(const std::string& name) const {
  for (const ProtocolSummary& p : protocols) {
    if (p.name == name) return p;
  }
  throw LookupError("comparison: no protocol " + name);
}

double ComparisonReport::ordering(const std::string& a, const std::string& b) const {
  for (const PairwiseOrdering& o : orderings) {
    if (o.a == a && o.b == b) return o.fraction;
  }
  throw LookupError("comparison: no ordering " + a + " vs " + b);
}

ComparisonReport compare_protocols(const ScenarioConfig& config,
                                   const std::vector<ProtocolKind>& protocols,
                                   const std::vector<std::uint64_t>& seeds) {
  if (protocols.empty()) throw ConfigError("protocols", "need at least one protocol");
  if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  config.validate();
  const Topology topology = build_topology(config);

  const std::size_t jobs = protocols.size() * seeds.size();
  std::vector<RunResult> results(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        ScenarioConfig c = config;
        c.protocol = protocols[j / seeds.size()];
        c.seed = seeds[j % seeds.size()];
        results[j] = run_scenario(c, topology);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(jobs, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ComparisonReport report;
  report.seeds = seeds;
  const double inv = 1.0 / static_cast<double>(seeds.size());
  for (std::size_t p = 0; p < protocols.size(); ++p) {
    ProtocolSummary sum;
    sum.name = std::string(to_string(protocols[p]));
    sum.mean_series.resize(config.rounds);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunResult& r = results[p * seeds.size() + s];
      for (std::size_t i = 0; i < r.series.size(); ++i) {
        MetricsSample& m = sum.mean_series[i];
        const MetricsSample& x = r.series[i];
        m.round = x.round;
        m.total_residual += x.total_residual * inv;
        m.mean_residual += x.mean_residual * inv;
        // Counters are averaged then rounded to the nearest whole count.
        m.alive_count += x.alive_count;
        m.records_delivered += x.records_delivered;
        m.elections_held += x.elections_held;
        m.bytes_on_air += x.bytes_on_air;
      }
      sum.final_mean_residual.push_back(r.series.empty() ? 0.0 : r.series.back().mean_residual);
      sum.first_death.push_back(r.first_death_round);
      std::optional<std::uint64_t> last;
      for (const MetricsSample& x : r.series)
        if (x.records_delivered > 0) last = x.round;
      sum.last_delivery.push_back(last);
    }
    const std::uint64_t n = seeds.size();
    for (MetricsSample& m : sum.mean_series) {
      m.alive_count = (m.alive_count + n / 2) / n;
      m.records_delivered = (m.records_delivered + n / 2) / n;
      m.elections_held = (m.elections_held + n / 2) / n;
      m.bytes_on_air = (m.bytes_on_air + n / 2) / n;
    }
    report.protocols.push_back(std::move(sum));
  }

  for (std::size_t a = 0; a < report.protocols.size(); ++a) {
    for (std::size_t b = 0; b < report.protocols.size(); ++b) {
      if (a == b) continue;
      const ProtocolSummary& pa = report.protocols[a];
      const ProtocolSummary& pb = report.protocols[b];
      double wins = 0.0;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        if (pa.final_mean_residual[s] > pb.final_mean_residual[s]) {
          wins += 1.0;
        } else if (pa.final_mean_residual[s] == pb.final_mean_residual[s]) {
          wins += 0.5;
        }
      }
      report.orderings.push_back({pa.name, pb.name, wins * inv});
    }
  }
  return report;
}

SeriesSet report_series(const ComparisonReport& report) {
  SeriesSet out;
  for (const ProtocolSummary& p : report.protocols) out.emplace(p.name, p.mean_series);
  return out;
}

std::string report_json(const ScenarioConfig& config, const ComparisonReport& report) {
  using nlohmann::ordered_json;
  ordered_json root;
  root["rounds"] = config.rounds;
  root["topology_seed"] = config.topology.seed;
  root["initial_j"] = config.energy.initial_j;
  root["seeds"] = report.seeds;
  ordered_json protos = ordered_json::array();
  for (const ProtocolSummary& p : report.protocols) {
    ordered_json deaths = ordered_json::array();
    for (const auto& d : p.first_death) deaths.push_back(d ? ordered_json(*d) : ordered_json());
    ordered_json last = ordered_json::array();
    for (const auto& d : p.last_delivery) last.push_back(d ? ordered_json(*d) : ordered_json());
    double mean_final = 0.0;
    for (double v : p.final_mean_residual) mean_final += v;
    mean_final /= static_cast<double>(p.final_mean_residual.size());
    protos.push_back({{"name", p.name},
                      {"final_mean_residual_j", p.final_mean_residual},
                      {"final_mean_residual_avg_j", mean_final},
                      {"first_node_death_round", deaths},
                      {"last_delivery_round", last}});
  }
  root["protocols"] = protos;
  ordered_json ord = ordered_json::array();
  for (const PairwiseOrdering& o : report.orderings) {
    ord.push_back({{"a", o.a}, {"b", o.b}, {"fraction_a_above_b", o.fraction}});
  }
  root["orderings"] = ord;
  return root.dump(2) + "\n";
}

}  // namespace sidle
