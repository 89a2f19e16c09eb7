#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sidle/errors.hpp"
#include "sidle/topology.hpp"

namespace sidle {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "sidle-topology";
constexpr int kVersion = 1;

json position_json(const Position& p) { return json{{"x", p.x}, {"y", p.y}}; }

Position position_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>()};
}

}  // namespace

std::string topology_to_text(const Topology& topology) {
  json root;
  root["format"] = kFormat;
  root["version"] = kVersion;
  root["cell_radius_m"] = topology.cell_radius();
  root["base_station"] = position_json(topology.base_station());

  json nodes = json::array();
  for (const NodeInfo& n : topology.nodes()) {
    nodes.push_back({{"id", n.id.value},
                     {"x", n.position.x},
                     {"y", n.position.y},
                     {"cell", n.cell.value},
                     {"hardware", n.hardware == HardwareClass::Sophisticated
                                      ? "sophisticated"
                                      : "primitive"}});
  }
  root["nodes"] = std::move(nodes);

  json cells = json::array();
  for (const Cell& c : topology.cells()) {
    json members = json::array();
    for (NodeId m : c.member_ids) members.push_back(m.value);
    cells.push_back({{"id", c.id.value},
                     {"q", c.hex.q},
                     {"r", c.hex.r},
                     {"center", position_json(c.center)},
                     {"cluster", c.cluster_id.value},
                     {"members", std::move(members)}});
  }
  root["cells"] = std::move(cells);

  json clusters = json::array();
  for (const Cluster& k : topology.clusters()) {
    json ids = json::array();
    for (CellId c : k.cell_ids) ids.push_back(c.value);
    clusters.push_back({{"id", k.id.value},
                        {"cells", std::move(ids)},
                        {"head_cell", k.head_cell_id.value},
                        {"head_node", k.head_node.value}});
  }
  root["clusters"] = std::move(clusters);
  return root.dump(2) + "\n";
}

Topology topology_from_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("topology", std::string("malformed topology file: ") + e.what());
  }
  try {
    if (root.at("format").get<std::string>() != kFormat) {
      throw ConfigError("topology.format", "not a sidle-topology file");
    }
    if (root.at("version").get<int>() != kVersion) {
      throw ConfigError("topology.version", "unsupported version");
    }
    std::vector<NodeInfo> nodes;
    for (const json& jn : root.at("nodes")) {
      NodeInfo n;
      n.id = NodeId{jn.at("id").get<std::uint32_t>()};
      n.position = {jn.at("x").get<double>(), jn.at("y").get<double>()};
      n.cell = CellId{jn.at("cell").get<std::uint32_t>()};
      const auto hw = jn.at("hardware").get<std::string>();
      if (hw != "primitive" && hw != "sophisticated") {
        throw ConfigError("topology.nodes.hardware", "unknown hardware class " + hw);
      }
      n.hardware = hw == "sophisticated" ? HardwareClass::Sophisticated
                                         : HardwareClass::Primitive;
      nodes.push_back(n);
    }
    std::vector<Cell> cells;
    for (const json& jc : root.at("cells")) {
      Cell c;
      c.id = CellId{jc.at("id").get<std::uint32_t>()};
      c.hex = {jc.at("q").get<int>(), jc.at("r").get<int>()};
      c.center = position_from(jc.at("center"));
      c.cluster_id = ClusterId{jc.at("cluster").get<std::uint32_t>()};
      for (const json& m : jc.at("members")) {
        c.member_ids.push_back(NodeId{m.get<std::uint32_t>()});
      }
      cells.push_back(std::move(c));
    }
    std::vector<Cluster> clusters;
    for (const json& jk : root.at("clusters")) {
      Cluster k;
      k.id = ClusterId{jk.at("id").get<std::uint32_t>()};
      const json& ids = jk.at("cells");
      if (ids.size() != 7) {
        throw ConfigError("topology.clusters.cells", "a cluster has exactly 7 cells");
      }
      for (std::size_t i = 0; i < 7; ++i) {
        k.cell_ids[i] = CellId{ids[i].get<std::uint32_t>()};
      }
      k.head_cell_id = CellId{jk.at("head_cell").get<std::uint32_t>()};
      k.head_node = NodeId{jk.at("head_node").get<std::uint32_t>()};
      clusters.push_back(k);
    }
    for (NodeInfo& n : nodes) {
      if (n.cell.index() >= cells.size()) {
        throw ConfigError("topology.nodes.cell", "unknown cell reference");
      }
      n.cluster = cells[n.cell.index()].cluster_id;
    }
    return Topology(root.at("cell_radius_m").get<double>(), std::move(nodes),
                    std::move(cells), std::move(clusters),
                    position_from(root.at("base_station")));
  } catch (const json::exception& e) {
    throw ConfigError("topology", std::string("invalid topology file: ") + e.what());
  }
}

void save_topology(const Topology& topology, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << topology_to_text(topology);
  if (!out) throw IoError("failed writing " + path);
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return topology_from_text(buf.str());
}

}  // namespace sidle
