// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   acceptance --cli PATH --work DIR

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "sidle/aggregate.hpp"
#include "sidle/compare.hpp"
#include "sidle/config.hpp"
#include "sidle/election.hpp"
#include "sidle/errors.hpp"
#include "sidle/leach.hpp"
#include "sidle/premiership.hpp"
#include "sidle/rng.hpp"
#include "sidle/runner.hpp"
#include "sidle/sidle_protocol.hpp"

using namespace sidle;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void verdict(int n, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " " << n << " " << name << ": " << detail
            << std::endl;
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string source_path(const std::string& rel) {
  return std::string(SIDLE_SOURCE_DIR) + "/" + rel;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ------------------------------------------------------------------ 1

void premiership_oracle() {
  const auto t0 = Clock::now();
  long cases = 0, wrong = 0;
  for (int re = 0; re <= 10; ++re)
    for (int ss = 0; ss <= 10; ++ss)
      for (int pl = 0; pl <= 20; ++pl)
        for (int ng = 0; ng <= 20; ++ng) {
          const std::int64_t want = static_cast<std::int64_t>(re) * re * re +
                                    2LL * ss * ss + 3LL * pl + ng;
          if (premiership({re, ng, pl, ss}) != want) ++wrong;
          ++cases;
        }
  const double s = seconds_since(t0);
  verdict(1, "premiership oracle", cases == 53361 && wrong == 0 && s < 1.0,
          std::to_string(cases) + " cases, " + std::to_string(wrong) + " mismatches, " +
              fmt("%.4f s", s));
}

// ------------------------------------------------------------------ 2

// Replays the attempt log: every non-final attempt has a tied minimum and the
// next attempt is exactly the tied set; the final one has a unique minimum,
// held by the winner.
bool election_log_consistent(const std::vector<NodeId>& cands, const ElectionResult& r) {
  std::set<NodeId> field(cands.begin(), cands.end());
  for (std::size_t a = 0; a < r.attempts.size(); ++a) {
    const auto& props = r.attempts[a].proposals;
    std::set<NodeId> who;
    SimTime lo = std::numeric_limits<SimTime>::max();
    for (const auto& [n, d] : props) {
      who.insert(n);
      lo = std::min(lo, d);
    }
    if (who != field) return false;
    std::set<NodeId> tied;
    for (const auto& [n, d] : props)
      if (d == lo) tied.insert(n);
    const bool last = a + 1 == r.attempts.size();
    if (last) {
      if (r.forced_tiebreak) return r.leader == *tied.begin();
      return tied.size() == 1 && *tied.begin() == r.leader;
    }
    if (tied.size() < 2) return false;
    field = tied;
  }
  return false;
}

void election_safety() {
  std::vector<NodeId> cell;
  for (std::uint32_t i = 0; i < 7; ++i) cell.push_back(NodeId{i});
  int bad = 0, forced = 0, max_restarts = 0;
  const ElectionParams normal;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    RngStream rng(seed, stream::kElectionDelay);
    const ElectionResult r = run_cell_election(cell, rng, normal);
    if (!r.leader.valid() || !election_log_consistent(cell, r)) ++bad;
    forced += r.forced_tiebreak ? 1 : 0;
    max_restarts = std::max(max_restarts, r.restarts);
  }
  // Forced full tie: the first draw is all zeros, redraws use the restart range.
  ElectionParams tie;
  tie.delay_max_ms = 0;
  int tie_bad = 0, tie_forced = 0, tie_max = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    RngStream rng(seed, stream::kElectionDelay);
    const ElectionResult r = run_cell_election(cell, rng, tie);
    if (!r.leader.valid() || !election_log_consistent(cell, r) || r.restarts < 1) ++tie_bad;
    tie_forced += r.forced_tiebreak ? 1 : 0;
    tie_max = std::max(tie_max, r.restarts);
  }
  const bool ok = bad == 0 && forced == 0 && max_restarts <= 50 && tie_bad == 0 &&
                  tie_forced == 0 && tie_max <= 50;
  verdict(2, "election safety and liveness", ok,
          "1000 elections, " + std::to_string(bad) + " bad, max restarts " +
              std::to_string(max_restarts) + "; delay_max=0: " + std::to_string(tie_bad) +
              " bad, " + std::to_string(tie_forced) + " forced, max restarts " +
              std::to_string(tie_max));
}

// ------------------------------------------------------------------ 3

void leach_identities() {
  const bool t0 = leach_threshold(0.05, 0, true) == 0.05;
  const bool t19 = leach_threshold(0.05, 19, true) == 1.0;
  LeachState st(100, 0.05);
  RngStream rng(1, stream::kLeachThreshold);
  const std::vector<bool> alive(100, true);
  std::vector<int> served(100, 0);
  std::size_t total = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto heads = st.elect(r, alive, rng);
    total += heads.size();
    if (r < 20)
      for (NodeId h : heads) ++served[h.index()];
  }
  const bool once = std::all_of(served.begin(), served.end(), [](int s) { return s == 1; });
  const double mean = static_cast<double>(total) / 200.0;
  verdict(3, "LEACH identities", t0 && t19 && once && mean >= 4.0 && mean <= 6.0,
          std::string("T(0.05,0)=") + fmt("%.17g", leach_threshold(0.05, 0, true)) +
              " T(0.05,19)=" + fmt("%.17g", leach_threshold(0.05, 19, true)) +
              ", epoch coverage " + (once ? "exact" : "broken") + ", mean CHs/round " +
              fmt("%.2f", mean));
}

// ------------------------------------------------------------------ 4

void packet_arithmetic() {
  const PacketFormat fmt_;
  const SensorModel sensors(1, fmt_.sensors);
  std::size_t raw = 0;
  for (std::uint64_t minute = 0; minute < 60; ++minute) {
    raw += sensors.sample(NodeId{0}, minute).values.size() * fmt_.bytes_per_reading;
  }
  ScenarioConfig cfg = default_config();
  cfg.rounds = 100;
  Simulation sim(cfg);
  sim.run();
  const auto& p = dynamic_cast<const SidleProtocol&>(sim.protocol());
  std::size_t records = 0, largest = 0;
  for (const NodeInfo& n : sim.topology().nodes()) {
    for (const auto& [key, rec] : p.node_state(n.id).replica_store) {
      ++records;
      largest = std::max(largest, rec.size_bytes);
    }
  }
  const double ratio = largest ? static_cast<double>(raw) / static_cast<double>(largest) : 0;
  const bool ok = raw == 2400 && raw_bytes_per_hour(fmt_) == 2400 && records > 0 &&
                  largest <= kMaxRecordBytes && ratio >= 8.0;
  verdict(4, "packet arithmetic", ok,
          std::to_string(raw) + " raw bytes/node/hour, " + std::to_string(records) +
              " stored records, largest " + std::to_string(largest) + " B, ratio " +
              fmt("%.2f", ratio));
}

// ------------------------------------------------------------------ 5

void energy_ledger() {
  std::string detail;
  bool ok = true;
  for (ProtocolKind k : {ProtocolKind::Sidle, ProtocolKind::Leach, ProtocolKind::Fca}) {
    ScenarioConfig cfg = default_config();
    cfg.protocol = k;
    cfg.rounds = 1000;
    cfg.energy.audit = true;
    cfg.energy.harvest_rate_w = 0.0;
    const auto t0 = Clock::now();
    Simulation sim(cfg);
    sim.run();
    const double s = seconds_since(t0);
    const EnergyLedger& l = sim.ledger();
    std::vector<std::int64_t> sum(l.size(), 0);
    for (const AuditEntry& e : l.audit()) sum[e.node.index()] += e.delta_pj;
    std::size_t open = 0;
    for (std::uint32_t i = 0; i < l.size(); ++i) {
      const NodeId n{i};
      if (l.initial(n).picojoules() + sum[i] != l.battery(n).residual.picojoules() ||
          l.initial(n) + l.harvested(n) - l.drained(n) != l.battery(n).residual) {
        ++open;
      }
    }
    std::size_t rises = 0;
    for (std::size_t r = 1; r < sim.series().size(); ++r) {
      if (sim.series()[r].total_residual > sim.series()[r - 1].total_residual) ++rises;
    }
    ok = ok && l.size() == 100 && sim.series().size() == 1000 && open == 0 && rises == 0 &&
         s < 10.0;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(k)) + " " +
              std::to_string(open) + " unbalanced, " + std::to_string(rises) + " rises, " +
              fmt("%.2f s", s);
  }
  verdict(5, "energy ledger", ok, detail);
}

// ------------------------------------------------------------------ 6

void failover() {
  ScenarioConfig cfg = load_config(source_path("configs/failover.json"));
  const Topology topo = build_topology(cfg);
  const std::uint64_t kill_round = cfg.failures.at(0).round;
  const NodeId dead = cfg.failures.at(0).node;
  const ClusterId orphaned = topo.node(dead).cluster;
  const ClusterId adoptive_cluster{orphaned.value == 0 ? 1u : 0u};
  const NodeId adoptive = topo.clusters()[adoptive_cluster.index()].head_node;

  Simulation sim(cfg);
  auto& p = dynamic_cast<SidleProtocol&>(sim.protocol());
  std::optional<std::uint64_t> routed;
  NodeId expected;
  std::vector<std::size_t> live_cells;  // expected arrivals per round
  while (!sim.finished()) {
    const std::uint64_t r = sim.series().size();
    (void)sim.step();
    // A cell produces a record only while it has a live leader. The dead
    // head led its own cell, which stays leaderless until its members miss
    // enough heartbeats to re-elect.
    std::size_t live = 0;
    for (const Cell& c : topo.cells()) {
      const NodeId l = p.cell_state(c.id).leader;
      live += l.valid() && sim.network().alive(l) && !p.cell_state(c.id).extinct ? 1 : 0;
    }
    live_cells.push_back(live);
    const ClusterState& ks = p.cluster_state(orphaned);
    if (!routed && ks.communicator.valid() && !ks.refugee_next_hop.empty()) {
      routed = r;
      // Closest responder: a live foreign cell leader within boosted reach of
      // some refugee, nearest first, lowest id on ties.
      const double reach = sim.network().params().profile.boosted.range_m;
      double best = std::numeric_limits<double>::infinity();
      for (const NodeInfo& n : topo.nodes()) {
        if (n.cluster == orphaned || !sim.network().alive(n.id) ||
            p.node_state(n.id).role != Role::Leader)
          continue;
        for (const auto& [refugee, hop] : ks.refugee_next_hop) {
          const double d = sim.network().distance_between(n.id, refugee);
          if (d <= reach && (d < best || (d == best && n.id < expected))) {
            best = d;
            expected = n.id;
          }
        }
      }
    }
  }
  const ClusterState& ks = p.cluster_state(orphaned);
  bool refugees = !ks.refugee_next_hop.empty();
  for (const auto& [leader, hop] : ks.refugee_next_hop)
    refugees = refugees && p.node_state(leader).role == Role::Refugee;
  const bool timely = routed && *routed >= kill_round && *routed - kill_round <= 2;
  const bool closest = ks.communicator.valid() && ks.communicator == expected &&
                       topo.node(ks.communicator).cluster == adoptive_cluster;

  // Every record of the last round may still be in flight when the run stops.
  std::size_t arrival_misses = 0;
  const std::uint64_t first = routed ? *routed : cfg.rounds;
  for (std::uint64_t r = first; r + 1 < cfg.rounds; ++r) {
    if (p.head_arrivals(adoptive, r) != live_cells[r]) ++arrival_misses;
  }
  std::size_t lost = 0;
  for (std::uint64_t r = 0; r <= kill_round; ++r)
    for (const Cell& c : topo.cells())
      if (!p.delivered().count(RecordKey{c.id, r})) ++lost;

  const bool ok = timely && closest && refugees && arrival_misses == 0 && lost == 0 &&
                  first + 1 < cfg.rounds;
  verdict(6, "failover", ok,
          "head " + std::to_string(dead.value) + " killed in round " +
              std::to_string(kill_round) + ", routed in round " +
              (routed ? std::to_string(*routed) : std::string("never")) + " via node " +
              (ks.communicator.valid() ? std::to_string(ks.communicator.value) : "none") +
              " (nearest responder " +
              (expected.valid() ? std::to_string(expected.value) : "none") + "), " +
              std::to_string(ks.refugee_next_hop.size()) + " refugees, " +
              std::to_string(arrival_misses) + " rounds with wrong arrival count (led cells " +
              (routed ? std::to_string(live_cells[*routed]) : std::string("?")) + " when routed, " +
              (live_cells.empty() ? "0" : std::to_string(live_cells.back())) + " at the end), " +
              std::to_string(lost) + " pre-kill records lost");
}

// ------------------------------------------------------------------ 7

struct Ordering {
  double vs_fca = 0;
  double vs_leach = 0;
  std::string json;
  std::string means;
  std::string at_cut;
};

Ordering compare_config(const std::string& rel, const fs::path& out) {
  const ScenarioConfig cfg = load_config(source_path(rel));
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  const ComparisonReport rep = compare_protocols(
      cfg, {ProtocolKind::Sidle, ProtocolKind::Leach, ProtocolKind::Fca}, seeds);
  Ordering o;
  // Residuals compared at the round where SIDLE last delivered, before any
  // saving that comes from having stopped work.
  std::uint64_t cut = cfg.rounds ? cfg.rounds - 1 : 0;
  for (const auto& d : rep.summary("sidle").last_delivery)
    if (d) cut = std::min(cut, *d);
  for (const ProtocolSummary& p : rep.protocols) {
    o.at_cut += (o.at_cut.empty() ? "" : ", ") + p.name + " " +
                fmt("%.3f J", p.mean_series.at(cut).mean_residual);
  }
  o.at_cut = "at round " + std::to_string(cut) + ": " + o.at_cut;
  o.vs_fca = rep.ordering("sidle", "fca");
  o.vs_leach = rep.ordering("sidle", "leach");
  o.json = report_json(cfg, rep);
  for (const ProtocolSummary& p : rep.protocols) {
    double m = 0;
    for (double v : p.final_mean_residual) m += v;
    m /= static_cast<double>(p.final_mean_residual.size());
    // Records still reaching the base at the end show whether a protocol
    // saved energy by doing work or by having stopped.
    std::uint64_t last = 0;
    for (const auto& d : p.last_delivery)
      if (d) last = std::max(last, *d);
    o.means += (o.means.empty() ? "" : ", ") + p.name + " " + fmt("%.3f J", m) +
               " last delivery by round " + std::to_string(last);
  }
  std::ofstream(out, std::ios::binary) << o.json;
  return o;
}

void residual_ordering(const fs::path& work) {
  const Ordering def = compare_config("configs/residual_compare.json", work / "report_residual_compare.json");
  const Ordering fs1 =
      compare_config("configs/residual_compare_free_space.json", work / "report_residual_compare_free_space.json");
  const Ordering fs2 = compare_config("configs/residual_compare_free_space.json",
                                      work / "report_residual_compare_free_space_again.json");
  const bool def_holds = def.vs_fca >= 0.9 && def.vs_leach >= 0.9;
  const bool fs_holds = fs1.vs_fca >= 0.9 && fs1.vs_leach >= 0.9;
  const bool deterministic = fs1.json == fs2.json && !fs1.json.empty();
  verdict(7, "residual-energy ordering", deterministic && fs_holds,
          "residual_compare.json: sidle>=fca " + fmt("%.2f", def.vs_fca) + ", sidle>=leach " +
              fmt("%.2f", def.vs_leach) + " (" + def.means + "; " + def.at_cut + ")" +
              (def_holds ? "" : " ordering fails") +
              "; residual_compare_free_space.json: sidle>=fca " + fmt("%.2f", fs1.vs_fca) +
              ", sidle>=leach " + fmt("%.2f", fs1.vs_leach) + " (" + fs1.means + "; " + fs1.at_cut + ")" +
              "; report " + (deterministic ? "byte-identical on rerun" : "differs on rerun"));
}

// ------------------------------------------------------------------ 8

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void determinism(const std::string& cli, const fs::path& work) {
  const fs::path a = work / "run_a", b = work / "run_b", rp = work / "replay";
  const std::string base = cli + " run --config " + source_path("configs/default.json") +
                           " --seed 7 --rounds 150 --plot --trace --out ";
  const int ra = shell(base + a.string() + " >/dev/null");
  const int rb = shell(base + b.string() + " >/dev/null");
  const bool csv = ra == 0 && rb == 0 && !slurp(a / "metrics.csv").empty() &&
                   slurp(a / "metrics.csv") == slurp(b / "metrics.csv");
  const bool svg = ra == 0 && rb == 0 && !slurp(a / "plot.svg").empty() &&
                   slurp(a / "plot.svg") == slurp(b / "plot.svg");
  const int rr = shell(cli + " replay --config " + (a / "config.json").string() +
                       " --topology " + (a / "topology.json").string() + " --expect-trace " +
                       (a / "trace.csv").string() + " --out " + rp.string() + " >" +
                       (work / "replay.json").string());
  const bool replay = rr == 0 && slurp(work / "replay.json").find("\"trace_matches\":true") !=
                                     std::string::npos;
  verdict(8, "determinism", csv && svg && replay,
          std::string("metrics.csv ") + (csv ? "identical" : "differs") + ", plot.svg " +
              (svg ? "identical" : "differs") + ", replay exit " + std::to_string(rr) +
              (replay ? " trace matches" : " trace differs"));
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = "acceptance_work";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    if (k == "--cli") cli = argv[i + 1];
    else if (k == "--work") work = argv[i + 1];
  }
  if (cli.empty()) {
    std::cerr << "usage: acceptance --cli PATH [--work DIR]\n";
    return 2;
  }
  fs::remove_all(work);
  fs::create_directories(work);

  const std::pair<int, std::function<void()>> checks[] = {
      {1, premiership_oracle},
      {2, election_safety},
      {3, leach_identities},
      {4, packet_arithmetic},
      {5, energy_ledger},
      {6, failover},
      {7, [&] { residual_ordering(work); }},
      {8, [&] { determinism(cli, work); }},
  };
  for (const auto& [n, check] : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      verdict(n, "criterion", false, std::string("threw: ") + e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " failed")
            << std::endl;
  return failures;
}
