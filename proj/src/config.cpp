#include "sidle/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "sidle/errors.hpp"

namespace sidle {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Sidle: return "sidle";
    case ProtocolKind::Leach: return "leach";
    case ProtocolKind::Fca: return "fca";
  }
  return "unknown";
}

ProtocolKind parse_protocol(std::string_view name) {
  if (name == "sidle") return ProtocolKind::Sidle;
  if (name == "leach") return ProtocolKind::Leach;
  if (name == "fca") return ProtocolKind::Fca;
  throw ConfigError("protocol", "unknown protocol '" + std::string(name) +
                                    "' (expected sidle, leach or fca)");
}

void ScenarioConfig::validate() const {
  if (round_period_ms < 1) throw ConfigError("round_period_ms", "must be >= 1");
  if (!topology_file) {
    if (topology.clusters < 1) throw ConfigError("topology.clusters", "must be >= 1");
    if (topology.nodes_per_cell < 1) {
      throw ConfigError("topology.nodes_per_cell", "must be >= 1");
    }
    if (topology.node_count && *topology.node_count < 1) {
      throw ConfigError("topology.node_count", "must be >= 1");
    }
    if (!(topology.cell_radius_m > 0.0)) {
      throw ConfigError("topology.cell_radius_m", "must be > 0");
    }
    if (!(topology.jitter >= 0.0 && topology.jitter < 0.5)) {
      throw ConfigError("topology.jitter", "must lie in [0, 0.5)");
    }
  }
  if (!(energy.initial_j > 0.0)) throw ConfigError("energy.initial_j", "must be > 0");
  if (energy.head_initial_j && !(*energy.head_initial_j > 0.0)) {
    throw ConfigError("energy.head_initial_j", "must be > 0");
  }
  if (!(energy.harvest_rate_w >= 0.0)) {
    throw ConfigError("energy.harvest_rate_w", "must be >= 0");
  }
  if (energy.day_rounds < 1) throw ConfigError("energy.day_rounds", "must be >= 1");
  energy.duty.validate();
  radio.validate();
  packet.validate();
  timing.validate();
  sidle.validate();
  if (sidle.master_deadline_ms >= round_period_ms) {
    throw ConfigError("sidle.master_deadline_ms", "must fall inside round_period_ms");
  }
  leach.validate();
  if (!(fca_degree_max > 0.0)) throw ConfigError("fca.degree_max", "must be > 0");
  if (!(fca_cluster_range_m > 0.0)) throw ConfigError("fca.cluster_range_m", "must be > 0");
  if (fca_cluster_range_m > radio.profile.boosted.range_m) {
    throw ConfigError("fca.cluster_range_m", "exceeds radio.boosted.range_m");
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].node.valid()) {
      throw ConfigError("failures[" + std::to_string(i) + "].node", "missing node id");
    }
    if (failures[i].offset_ms < 0 || failures[i].offset_ms >= round_period_ms) {
      throw ConfigError("failures[" + std::to_string(i) + "].offset_ms",
                        "must lie inside the round");
    }
  }
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

FcaParams fca_params(const ScenarioConfig& config) {
  FcaParams p;
  p.cluster_range_m = config.fca_cluster_range_m;
  p.rules = config.fca_rules_file ? load_rule_base(*config.fca_rules_file)
                                  : FuzzyRuleBase::defaults(config.fca_degree_max);
  return p;
}

namespace {

// One JSON object being read against a fixed key set.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) {
      throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
    }
  }

  [[nodiscard]] std::string key(const std::string& k) const {
    return path_.empty() ? k : path_ + "." + k;
  }

  const json* find(const std::string& k) {
    seen_.insert(k);
    if (j_ == nullptr) return nullptr;
    const auto it = j_->find(k);
    return it == j_->end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& k, T& out) {
    if (const json* v = find(k)) out = convert<T>(*v, key(k));
  }

  template <typename T>
  void read_optional(const std::string& k, std::optional<T>& out) {
    if (const json* v = find(k)) {
      if (v->is_null()) {
        out.reset();
      } else {
        out = convert<T>(*v, key(k));
      }
    }
  }

  Section sub(const std::string& k) {
    const json* v = find(k);
    if (v != nullptr && v->is_null()) v = nullptr;
    return Section(v, key(k));
  }

  void done() const {
    if (j_ == nullptr) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.contains(k)) throw ConfigError(key(k), "unknown key");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& key) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
      const auto raw = v.get<std::uint64_t>();
      if (raw > std::numeric_limits<T>::max()) throw ConfigError(key, "value too large");
      return static_cast<T>(raw);
    } else {
      if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
      return v.get<T>();
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_path_loss(Section s, PathLossParams& p) {
  s.read("p0_dbm", p.p0_dbm);
  s.read("exponent", p.exponent);
  s.read("sensitivity_dbm", p.sensitivity_dbm);
  s.read("range_m", p.range_m);
  s.done();
}

ordered_json path_loss_json(const PathLossParams& p) {
  return ordered_json{{"p0_dbm", p.p0_dbm},
                      {"exponent", p.exponent},
                      {"sensitivity_dbm", p.sensitivity_dbm},
                      {"range_m", p.range_m}};
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

constexpr const char* kPolyNames[] = {"re", "ng", "pl", "ss"};

}  // namespace

ScenarioConfig config_from_json(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c = default_config();
  Section top(&root, "");
  top.read("seed", c.seed);
  top.read("rounds", c.rounds);
  std::string protocol(to_string(c.protocol));
  top.read("protocol", protocol);
  c.protocol = parse_protocol(protocol);
  top.read("round_period_ms", c.round_period_ms);
  top.read("check_invariants", c.check_invariants);

  {
    Section s = top.sub("topology");
    TopologyConfig& t = c.topology;
    s.read("clusters", t.clusters);
    s.read("nodes_per_cell", t.nodes_per_cell);
    s.read_optional("node_count", t.node_count);
    s.read("cell_radius_m", t.cell_radius_m);
    s.read("jitter", t.jitter);
    s.read("seed", t.seed);
    s.read("base_station_distance_m", t.base_station_distance_m);
    if (const json* bs = s.find("base_station"); bs != nullptr && !bs->is_null()) {
      Section b(bs, s.key("base_station"));
      Position p;
      b.read("x", p.x);
      b.read("y", p.y);
      b.done();
      if (!bs->contains("x") || !bs->contains("y")) {
        throw ConfigError(s.key("base_station"), "needs both x and y");
      }
      t.base_station = p;
    } else if (bs != nullptr) {
      t.base_station.reset();
    }
    std::optional<std::string> file;
    s.read_optional("file", file);
    if (file) c.topology_file = resolve(base_dir, *file);
    s.done();
  }
  {
    Section s = top.sub("energy");
    EnergyConfig& e = c.energy;
    s.read("initial_j", e.initial_j);
    s.read_optional("head_initial_j", e.head_initial_j);
    s.read("harvest_rate_w", e.harvest_rate_w);
    s.read("day_rounds", e.day_rounds);
    s.read("active_power_w", e.duty.active_power_w);
    s.read("sleep_power_w", e.duty.sleep_power_w);
    s.read("cpu_j_per_record", e.duty.cpu_j_per_record);
    s.read("audit", e.audit);
    s.done();
  }
  {
    Section s = top.sub("radio");
    NetworkParams& r = c.radio;
    s.read("latency_ms", r.latency_ms);
    s.read("loss_probability", r.loss_probability);
    s.read("electronics_j_per_bit", r.cost.electronics_j_per_bit);
    s.read("amplifier_j_per_bit_m2", r.cost.amplifier_j_per_bit_m2);
    s.read("rx_j_per_bit", r.cost.rx_j_per_bit);
    read_path_loss(s.sub("low"), r.profile.low);
    read_path_loss(s.sub("boosted"), r.profile.boosted);
    read_path_loss(s.sub("high"), r.profile.high);
    s.done();
  }
  {
    Section s = top.sub("packet");
    PacketFormat& f = c.packet;
    s.read("sensors", f.sensors);
    s.read("bytes_per_reading", f.bytes_per_reading);
    s.read("header_bytes", f.header_bytes);
    s.read("crypto_overhead_bytes", f.crypto_overhead_bytes);
    s.read("summary_bytes_per_channel", f.summary_bytes_per_channel);
    s.done();
  }
  {
    Section s = top.sub("timing");
    s.read("slot_ms", c.timing.slot_ms);
    s.read("listen_window_ms", c.timing.listen_window_ms);
    s.done();
  }
  {
    Section s = top.sub("sidle");
    SidleParams& p = c.sidle;
    s.read("delay_max_ms", p.election.delay_max_ms);
    s.read("restart_delay_max_ms", p.election.restart_delay_max_ms);
    s.read("max_restarts", p.election.max_restarts);
    s.read("term_rounds", p.term_rounds);
    s.read("energy_floor", p.energy_floor);
    s.read("heartbeat_misses", p.heartbeat_misses);
    s.read("uplink_misses", p.uplink_misses);
    s.read("max_hops", p.max_hops);
    s.read_optional("fixed_ng", p.fixed_ng);
    s.read_optional("fixed_pl", p.fixed_pl);
    s.read("claim_offset_ms", p.claim_offset_ms);
    s.read("election_window_ms", p.election_window_ms);
    s.read("head_deadline_ms", p.head_deadline_ms);
    s.read("master_deadline_ms", p.master_deadline_ms);
    s.read("pending_limit", p.pending_limit);
    s.read("replica_limit", p.replica_limit);
    s.read("uplink_batch", p.uplink_batch);
    {
      Section poly = s.sub("premiership");
      for (std::size_t i = 0; i < 4; ++i) {
        poly.read(std::string(kPolyNames[i]) + "_coefficient", p.polynomial.coefficients[i]);
        poly.read(std::string(kPolyNames[i]) + "_power", p.polynomial.powers[i]);
      }
      poly.done();
    }
    s.done();
  }
  {
    Section s = top.sub("leach");
    s.read("p", c.leach.p);
    s.done();
  }
  {
    Section s = top.sub("fca");
    s.read("cluster_range_m", c.fca_cluster_range_m);
    s.read("degree_max", c.fca_degree_max);
    std::optional<std::string> rules;
    s.read_optional("rules_file", rules);
    if (rules) c.fca_rules_file = resolve(base_dir, *rules);
    s.done();
  }
  if (const json* fs = top.find("failures"); fs != nullptr && !fs->is_null()) {
    if (!fs->is_array()) throw ConfigError("failures", "expected a list");
    c.failures.clear();
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const std::string path = "failures[" + std::to_string(i) + "]";
      Section s(&(*fs)[i], path);
      FailureSpec f;
      std::uint32_t node = 0;
      if (!(*fs)[i].contains("node")) throw ConfigError(path + ".node", "missing node id");
      s.read("node", node);
      f.node = NodeId{node};
      s.read("round", f.round);
      s.read("offset_ms", f.offset_ms);
      std::string action = "kill";
      s.read("action", action);
      if (action == "kill") {
        f.action = FailureAction::Kill;
      } else if (action == "reset") {
        f.action = FailureAction::Reset;
      } else {
        throw ConfigError(path + ".action", "expected kill or reset");
      }
      s.done();
      c.failures.push_back(f);
    }
  }
  if (const json* cs = top.find("commands"); cs != nullptr && !cs->is_null()) {
    if (!cs->is_array()) throw ConfigError("commands", "expected a list");
    c.commands.clear();
    for (std::size_t i = 0; i < cs->size(); ++i) {
      const std::string path = "commands[" + std::to_string(i) + "]";
      Section s(&(*cs)[i], path);
      Command cmd;
      std::uint32_t node = 0;
      if (!(*cs)[i].contains("node")) throw ConfigError(path + ".node", "missing node id");
      s.read("node", node);
      cmd.target = NodeId{node};
      s.read("round", cmd.round);
      s.read("activate", cmd.activate);
      s.done();
      c.commands.push_back(cmd);
    }
  }
  top.done();
  c.validate();
  return c;
}

std::string config_to_json(const ScenarioConfig& c) {
  ordered_json root;
  root["seed"] = c.seed;
  root["rounds"] = c.rounds;
  root["protocol"] = to_string(c.protocol);
  root["round_period_ms"] = c.round_period_ms;
  root["check_invariants"] = c.check_invariants;

  const TopologyConfig& t = c.topology;
  ordered_json topo;
  topo["clusters"] = t.clusters;
  topo["nodes_per_cell"] = t.nodes_per_cell;
  topo["node_count"] = t.node_count ? ordered_json(*t.node_count) : ordered_json(nullptr);
  topo["cell_radius_m"] = t.cell_radius_m;
  topo["jitter"] = t.jitter;
  topo["seed"] = t.seed;
  topo["base_station"] = t.base_station
                             ? ordered_json{{"x", t.base_station->x}, {"y", t.base_station->y}}
                             : ordered_json(nullptr);
  topo["base_station_distance_m"] = t.base_station_distance_m;
  topo["file"] = c.topology_file ? ordered_json(*c.topology_file) : ordered_json(nullptr);
  root["topology"] = topo;

  const EnergyConfig& e = c.energy;
  root["energy"] = ordered_json{
      {"initial_j", e.initial_j},
      {"head_initial_j",
       e.head_initial_j ? ordered_json(*e.head_initial_j) : ordered_json(nullptr)},
      {"harvest_rate_w", e.harvest_rate_w},
      {"day_rounds", e.day_rounds},
      {"active_power_w", e.duty.active_power_w},
      {"sleep_power_w", e.duty.sleep_power_w},
      {"cpu_j_per_record", e.duty.cpu_j_per_record},
      {"audit", e.audit}};

  const NetworkParams& r = c.radio;
  root["radio"] = ordered_json{{"latency_ms", r.latency_ms},
                               {"loss_probability", r.loss_probability},
                               {"electronics_j_per_bit", r.cost.electronics_j_per_bit},
                               {"amplifier_j_per_bit_m2", r.cost.amplifier_j_per_bit_m2},
                               {"rx_j_per_bit", r.cost.rx_j_per_bit},
                               {"low", path_loss_json(r.profile.low)},
                               {"boosted", path_loss_json(r.profile.boosted)},
                               {"high", path_loss_json(r.profile.high)}};

  const PacketFormat& f = c.packet;
  root["packet"] = ordered_json{{"sensors", f.sensors},
                                {"bytes_per_reading", f.bytes_per_reading},
                                {"header_bytes", f.header_bytes},
                                {"crypto_overhead_bytes", f.crypto_overhead_bytes},
                                {"summary_bytes_per_channel", f.summary_bytes_per_channel}};
  root["timing"] = ordered_json{{"slot_ms", c.timing.slot_ms},
                                {"listen_window_ms", c.timing.listen_window_ms}};

  const SidleParams& p = c.sidle;
  ordered_json poly;
  for (std::size_t i = 0; i < 4; ++i) {
    poly[std::string(kPolyNames[i]) + "_coefficient"] = p.polynomial.coefficients[i];
    poly[std::string(kPolyNames[i]) + "_power"] = p.polynomial.powers[i];
  }
  root["sidle"] = ordered_json{
      {"delay_max_ms", p.election.delay_max_ms},
      {"restart_delay_max_ms", p.election.restart_delay_max_ms},
      {"max_restarts", p.election.max_restarts},
      {"term_rounds", p.term_rounds},
      {"energy_floor", p.energy_floor},
      {"heartbeat_misses", p.heartbeat_misses},
      {"uplink_misses", p.uplink_misses},
      {"max_hops", p.max_hops},
      {"fixed_ng", p.fixed_ng ? ordered_json(*p.fixed_ng) : ordered_json(nullptr)},
      {"fixed_pl", p.fixed_pl ? ordered_json(*p.fixed_pl) : ordered_json(nullptr)},
      {"claim_offset_ms", p.claim_offset_ms},
      {"election_window_ms", p.election_window_ms},
      {"head_deadline_ms", p.head_deadline_ms},
      {"master_deadline_ms", p.master_deadline_ms},
      {"pending_limit", p.pending_limit},
      {"replica_limit", p.replica_limit},
      {"uplink_batch", p.uplink_batch},
      {"premiership", poly}};
  root["leach"] = ordered_json{{"p", c.leach.p}};
  root["fca"] = ordered_json{
      {"cluster_range_m", c.fca_cluster_range_m},
      {"degree_max", c.fca_degree_max},
      {"rules_file", c.fca_rules_file ? ordered_json(*c.fca_rules_file) : ordered_json(nullptr)}};

  ordered_json failures = ordered_json::array();
  for (const FailureSpec& fs : c.failures) {
    failures.push_back({{"round", fs.round},
                        {"offset_ms", fs.offset_ms},
                        {"node", fs.node.value},
                        {"action", fs.action == FailureAction::Kill ? "kill" : "reset"}});
  }
  root["failures"] = failures;
  ordered_json commands = ordered_json::array();
  for (const Command& cmd : c.commands) {
    commands.push_back(
        {{"round", cmd.round}, {"node", cmd.target.value}, {"activate", cmd.activate}});
  }
  root["commands"] = commands;
  return root.dump(2) + "\n";
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace sidle
