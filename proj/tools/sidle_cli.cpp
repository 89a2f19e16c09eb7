// Command-line front end: run, compare, defaults, replay.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sidle/compare.hpp"
#include "sidle/errors.hpp"

namespace fs = std::filesystem;
using namespace sidle;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> protocol;
  std::optional<std::uint64_t> rounds;
  std::string out = ".";
  bool plot = false;
  bool trace = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "scenario config (JSON)");
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_option("--protocol", c.protocol, "sidle, leach or fca");
  cmd->add_option("--rounds", c.rounds, "number of rounds");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--plot", c.plot, "also write an SVG plot");
  cmd->add_flag("--trace", c.trace, "also write the event trace");
}

ScenarioConfig effective_config(const Common& c) {
  ScenarioConfig cfg = c.config_path.empty() ? default_config() : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.protocol) cfg.protocol = parse_protocol(*c.protocol);
  if (c.rounds) cfg.rounds = *c.rounds;
  cfg.validate();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_run(const Common& c) {
  ScenarioConfig cfg = effective_config(c);
  const Topology topology = build_topology(cfg);
  make_dir(c.out);
  // The saved layout and config make the run replayable without the
  // original topology generator settings.
  ScenarioConfig saved = cfg;
  saved.topology_file = "topology.json";
  save_topology(topology, join(c.out, "topology.json"));
  write_text_file(join(c.out, "config.json"), config_to_json(saved));

  const RunResult r = run_scenario(cfg, topology, c.trace);
  export_csv(r.series, join(c.out, "metrics.csv"));
  if (c.plot) {
    emit_plot({{std::string(to_string(cfg.protocol)), r.series}}, "mean_residual",
              join(c.out, "plot.svg"));
  }
  if (c.trace) write_text_file(join(c.out, "trace.csv"), r.trace_csv);
  if (cfg.energy.audit) write_text_file(join(c.out, "audit.csv"), r.audit_csv);

  nlohmann::ordered_json summary;
  summary["protocol"] = to_string(cfg.protocol);
  summary["seed"] = cfg.seed;
  summary["rounds"] = cfg.rounds;
  summary["final_mean_residual_j"] = r.series.empty() ? 0.0 : r.series.back().mean_residual;
  summary["first_node_death_round"] =
      r.first_death_round ? nlohmann::ordered_json(*r.first_death_round) : nullptr;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& names,
                std::uint64_t seed_count) {
  ScenarioConfig cfg = effective_config(c);
  std::vector<ProtocolKind> kinds;
  for (const std::string& n : names) kinds.push_back(parse_protocol(n));
  if (seed_count == 0) throw ConfigError("seeds", "need at least one seed");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < seed_count; ++i) seeds.push_back(cfg.seed + i);

  const ComparisonReport report = compare_protocols(cfg, kinds, seeds);
  make_dir(c.out);
  write_text_file(join(c.out, "report.json"), report_json(cfg, report));
  for (const ProtocolSummary& p : report.protocols) {
    export_csv(p.mean_series, join(c.out, "mean_" + p.name + ".csv"));
  }
  if (c.plot) emit_plot(report_series(report), "mean_residual", join(c.out, "plot.svg"));
  std::cout << report_json(cfg, report);
  return 0;
}

int cmd_defaults(const Common& c) {
  std::cout << config_to_json(effective_config(c));
  return 0;
}

int cmd_replay(const Common& c, const std::string& topology_path,
               const std::string& trace_path) {
  ScenarioConfig cfg = effective_config(c);
  const Topology topology =
      topology_path.empty() ? build_topology(cfg) : load_topology(topology_path);
  const RunResult r = run_scenario(cfg, topology, true);
  make_dir(c.out);
  export_csv(r.series, join(c.out, "replay_metrics.csv"));
  write_text_file(join(c.out, "replay_trace.csv"), r.trace_csv);
  if (c.plot) {
    emit_plot({{std::string(to_string(cfg.protocol)), r.series}}, "mean_residual",
              join(c.out, "replay_plot.svg"));
  }
  bool match = true;
  if (!trace_path.empty()) match = read_file(trace_path) == r.trace_csv;
  nlohmann::ordered_json summary;
  summary["trace_rows"] = std::count(r.trace_csv.begin(), r.trace_csv.end(), '\n');
  summary["trace_matches"] = trace_path.empty() ? nlohmann::ordered_json(nullptr)
                                                : nlohmann::ordered_json(match);
  std::cout << summary.dump() << "\n";
  if (!match) {
    std::cerr << nlohmann::json{{"error", "replay-mismatch"},
                                {"message", "trace differs from " + trace_path}}
                     .dump()
              << "\n";
    return 5;
  }
  return 0;
}

int report_error(const char* kind, const std::string& message, const std::string& key = "") {
  nlohmann::ordered_json j;
  j["error"] = kind;
  if (!key.empty()) j["key"] = key;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical sensor-network clustering simulator"};
  app.require_subcommand(1);

  Common run_opts, cmp_opts, def_opts, rep_opts;
  auto* run = app.add_subcommand("run", "run one scenario and write metrics.csv");
  add_common(run, run_opts);

  auto* cmp = app.add_subcommand("compare", "run several protocols over several seeds");
  add_common(cmp, cmp_opts);
  std::vector<std::string> names{"sidle", "leach", "fca"};
  std::uint64_t seed_count = 20;
  cmp->add_option("--protocols", names, "protocols to compare")->delimiter(',');
  cmp->add_option("--seeds", seed_count, "number of consecutive seeds from --seed");

  auto* def = app.add_subcommand("defaults", "print the effective config");
  add_common(def, def_opts);

  auto* rep = app.add_subcommand("replay", "re-run from a saved topology and check the trace");
  add_common(rep, rep_opts);
  std::string topology_path, trace_path;
  rep->add_option("--topology", topology_path, "saved topology file");
  rep->add_option("--expect-trace", trace_path, "trace to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what()) + 1;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*cmp) return cmd_compare(cmp_opts, names, seed_count);
    if (*def) return cmd_defaults(def_opts);
    if (*rep) return cmd_replay(rep_opts, topology_path, trace_path);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), e.key()) + 2;
  } catch (const IoError& e) {
    return report_error("io", e.what()) + 3;
  } catch (const InvariantViolation& e) {
    // Keep the error line single-line; the trace excerpt follows it.
    std::string msg = e.what();
    const auto nl = msg.find('\n');
    report_error("invariant", msg.substr(0, nl));
    if (nl != std::string::npos) std::cerr << msg.substr(nl + 1);
    return 5;
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
