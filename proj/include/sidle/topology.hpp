#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sidle/ids.hpp"

namespace sidle {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

[[nodiscard]] double distance(const Position& a, const Position& b);

// Axial hexagon coordinate (pointy-top layout).
struct HexCoord {
  int q = 0;
  int r = 0;

  friend bool operator==(const HexCoord&, const HexCoord&) = default;
  friend auto operator<=>(const HexCoord&, const HexCoord&) = default;
};

[[nodiscard]] int hex_distance(HexCoord a, HexCoord b);
[[nodiscard]] std::array<HexCoord, 6> hex_neighbors(HexCoord c);

enum class HardwareClass : std::uint8_t {
  Primitive,      // short-range radio, local sensing only
  Sophisticated,  // long-range head-cluster node
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  [[nodiscard]] bool contains(const Position& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  [[nodiscard]] double diagonal() const;
};

struct TopologyConfig {
  std::uint32_t clusters = 2;
  std::uint32_t nodes_per_cell = 7;
  // When set, overrides nodes_per_cell: this many nodes are spread as evenly
  // as possible over all cells, lower cell ids taking the remainder.
  std::optional<std::uint32_t> node_count;
  double cell_radius_m = 100.0;
  double jitter = 0.3;  // fraction of cell_radius_m, in [0, 0.5)
  std::uint64_t seed = 1;
  // Base-station sink. Defaults to a point below the deployment, centered
  // horizontally, base_station_distance_m past the bounding box edge.
  std::optional<Position> base_station;
  double base_station_distance_m = 400.0;
};

struct NodeInfo {
  NodeId id;
  Position position;
  HardwareClass hardware = HardwareClass::Primitive;
  CellId cell;
  ClusterId cluster;
};

struct Cell {
  CellId id;
  HexCoord hex;
  Position center;
  std::vector<NodeId> member_ids;  // ascending
  ChannelIndex frequency_channel = 0;
  ClusterId cluster_id;
};

struct Cluster {
  ClusterId id;
  std::array<CellId, 7> cell_ids;  // [0] is the head cell
  CellId head_cell_id;
  NodeId head_node;
};

struct ChannelPlan {
  std::vector<ChannelIndex> cell_frequency;  // indexed by CellId
  std::vector<CodeIndex> node_code;          // indexed by NodeId
};

// Immutable deployment: nodes, hexagonal cells, 7-cell clusters, channel plan.
class Topology {
 public:
  Topology(double cell_radius_m, std::vector<NodeInfo> nodes,
           std::vector<Cell> cells, std::vector<Cluster> clusters,
           Position base_station);

  [[nodiscard]] const std::vector<NodeInfo>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<Cluster>& clusters() const {
    return clusters_;
  }
  [[nodiscard]] const ChannelPlan& channel_plan() const { return plan_; }

  [[nodiscard]] const NodeInfo& node(NodeId id) const;
  [[nodiscard]] const Cell& cell(CellId id) const;
  [[nodiscard]] const Cluster& cluster(ClusterId id) const;

  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] double cell_radius() const { return cell_radius_m_; }
  [[nodiscard]] Position base_station() const { return base_station_; }
  [[nodiscard]] BoundingBox bounds() const { return bounds_; }

  [[nodiscard]] bool cells_adjacent(CellId a, CellId b) const;
  [[nodiscard]] std::vector<CellId> adjacent_cells(CellId c) const;
  [[nodiscard]] bool is_head_node(NodeId id) const;
  // Nearest cell of the hexagonal lattice, whether or not it is deployed.
  [[nodiscard]] HexCoord hex_at(Position p) const;
  [[nodiscard]] Position hex_center(HexCoord h) const;

  [[nodiscard]] std::vector<NodeId> neighbors_within(NodeId id,
                                                     double range_m) const;

  friend bool operator==(const Topology& a, const Topology& b);

 private:
  void build_index();

  double cell_radius_m_;
  std::vector<NodeInfo> nodes_;
  std::vector<Cell> cells_;
  std::vector<Cluster> clusters_;
  Position base_station_;
  BoundingBox bounds_;
  ChannelPlan plan_;

  // Uniform bucket grid over node positions for range queries.
  double bucket_size_ = 1.0;
  int bucket_cols_ = 1;
  int bucket_rows_ = 1;
  std::vector<std::vector<NodeId>> buckets_;
};

// Tiles 7-cell clusters on a hexagonal lattice and drops nodes around
// deterministic anchors in each cell. Pure in (config).
[[nodiscard]] Topology generate_hex_mesh(const TopologyConfig& config);

// Per-cell FDMA channels and per-node CDMA codes.
[[nodiscard]] ChannelPlan assign_channels(const Topology& topology);

[[nodiscard]] std::vector<NodeId> neighbors_within(const Topology& topology,
                                                   NodeId id, double range_m);

// Plain-text scenario layout, JSON. Doubles round-trip exactly.
[[nodiscard]] std::string topology_to_text(const Topology& topology);
[[nodiscard]] Topology topology_from_text(const std::string& text);
void save_topology(const Topology& topology, const std::string& path);
[[nodiscard]] Topology load_topology(const std::string& path);

}  // namespace sidle
