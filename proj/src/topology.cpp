#include "sidle/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "sidle/errors.hpp"
#include "sidle/rng.hpp"

namespace sidle {

namespace {

constexpr std::array<HexCoord, 6> kDirections{{
    {1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1},
}};

// Offsets between adjacent cluster centers in the 7-cell tiling.
constexpr HexCoord kClusterStepA{2, 1};
constexpr HexCoord kClusterStepB{-1, 3};

HexCoord add(HexCoord a, HexCoord b) { return {a.q + b.q, a.r + b.r}; }
HexCoord scale(HexCoord a, int k) { return {a.q * k, a.r * k}; }

// Hexagons of the super-lattice in spiral order: center, then ring by ring.
std::vector<HexCoord> spiral(std::size_t count) {
  std::vector<HexCoord> out;
  out.reserve(count);
  out.push_back({0, 0});
  for (int ring = 1; out.size() < count; ++ring) {
    HexCoord h = scale(kDirections[4], ring);
    for (int side = 0; side < 6 && out.size() < count; ++side) {
      for (int step = 0; step < ring && out.size() < count; ++step) {
        out.push_back(h);
        h = add(h, kDirections[side]);
      }
    }
  }
  return out;
}

// FDMA reuse color of a lattice cell: constant along the cluster tiling
// vectors and distinct within every 7-cell flower.
int reuse_color(HexCoord h) {
  const int c = (3 * h.q + h.r) % 7;
  return c < 0 ? c + 7 : c;
}

}  // namespace

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

int hex_distance(HexCoord a, HexCoord b) {
  const int dq = a.q - b.q;
  const int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

std::array<HexCoord, 6> hex_neighbors(HexCoord c) {
  std::array<HexCoord, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = add(c, kDirections[i]);
  return out;
}

double BoundingBox::diagonal() const {
  return std::hypot(max_x - min_x, max_y - min_y);
}

Topology::Topology(double cell_radius_m, std::vector<NodeInfo> nodes,
                   std::vector<Cell> cells, std::vector<Cluster> clusters,
                   Position base_station)
    : cell_radius_m_(cell_radius_m),
      nodes_(std::move(nodes)),
      cells_(std::move(cells)),
      clusters_(std::move(clusters)),
      base_station_(base_station) {
  if (!(cell_radius_m_ > 0.0) || !std::isfinite(cell_radius_m_)) {
    throw ConfigError("topology.cell_radius_m", "must be a positive number");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.index() != i) {
      throw ConfigError("topology.nodes", "node ids must be dense from 0");
    }
    if (nodes_[i].cell.index() >= cells_.size()) {
      throw ConfigError("topology.nodes", "node refers to unknown cell");
    }
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].id.index() != i) {
      throw ConfigError("topology.cells", "cell ids must be dense from 0");
    }
    if (cells_[i].member_ids.empty()) {
      throw ConfigError("topology.cells", "cell " + std::to_string(i) +
                                              " has no members");
    }
  }
  for (std::size_t i = 0; i < clusters_.size(); ++i) {
    if (clusters_[i].id.index() != i) {
      throw ConfigError("topology.clusters", "cluster ids must be dense");
    }
  }

  bounds_ = {cells_.empty() ? 0.0 : cells_.front().center.x,
             cells_.empty() ? 0.0 : cells_.front().center.y,
             cells_.empty() ? 0.0 : cells_.front().center.x,
             cells_.empty() ? 0.0 : cells_.front().center.y};
  for (const Cell& c : cells_) {
    bounds_.min_x = std::min(bounds_.min_x, c.center.x - cell_radius_m_);
    bounds_.max_x = std::max(bounds_.max_x, c.center.x + cell_radius_m_);
    bounds_.min_y = std::min(bounds_.min_y, c.center.y - cell_radius_m_);
    bounds_.max_y = std::max(bounds_.max_y, c.center.y + cell_radius_m_);
  }

  plan_ = assign_channels(*this);
  for (Cell& c : cells_) c.frequency_channel = plan_.cell_frequency[c.id.index()];
  build_index();
}

const NodeInfo& Topology::node(NodeId id) const {
  if (!id.valid() || id.index() >= nodes_.size()) {
    throw LookupError("unknown node id " + std::to_string(id.value));
  }
  return nodes_[id.index()];
}

const Cell& Topology::cell(CellId id) const {
  if (!id.valid() || id.index() >= cells_.size()) {
    throw LookupError("unknown cell id " + std::to_string(id.value));
  }
  return cells_[id.index()];
}

const Cluster& Topology::cluster(ClusterId id) const {
  if (!id.valid() || id.index() >= clusters_.size()) {
    throw LookupError("unknown cluster id " + std::to_string(id.value));
  }
  return clusters_[id.index()];
}

bool Topology::cells_adjacent(CellId a, CellId b) const {
  return hex_distance(cell(a).hex, cell(b).hex) == 1;
}

std::vector<CellId> Topology::adjacent_cells(CellId c) const {
  std::vector<CellId> out;
  const HexCoord h = cell(c).hex;
  for (const Cell& other : cells_) {
    if (hex_distance(h, other.hex) == 1) out.push_back(other.id);
  }
  return out;
}

bool Topology::is_head_node(NodeId id) const {
  const NodeInfo& n = node(id);
  return n.cluster.valid() && cluster(n.cluster).head_node == id;
}

Position Topology::hex_center(HexCoord h) const {
  const double s3 = std::numbers::sqrt3;
  return {cell_radius_m_ * s3 * (h.q + h.r / 2.0), cell_radius_m_ * 1.5 * h.r};
}

HexCoord Topology::hex_at(Position p) const {
  const double s3 = std::numbers::sqrt3;
  const double fq = (s3 / 3.0 * p.x - p.y / 3.0) / cell_radius_m_;
  const double fr = (2.0 / 3.0 * p.y) / cell_radius_m_;
  const double fs = -fq - fr;
  double q = std::round(fq);
  double r = std::round(fr);
  const double s = std::round(fs);
  const double dq = std::abs(q - fq);
  const double dr = std::abs(r - fr);
  const double ds = std::abs(s - fs);
  if (dq > dr && dq > ds) {
    q = -r - s;
  } else if (dr > ds) {
    r = -q - s;
  }
  return {static_cast<int>(q), static_cast<int>(r)};
}

void Topology::build_index() {
  bucket_size_ = cell_radius_m_;
  bucket_cols_ = std::max(
      1, static_cast<int>(std::ceil((bounds_.max_x - bounds_.min_x) / bucket_size_)) + 1);
  bucket_rows_ = std::max(
      1, static_cast<int>(std::ceil((bounds_.max_y - bounds_.min_y) / bucket_size_)) + 1);
  buckets_.assign(static_cast<std::size_t>(bucket_cols_ * bucket_rows_), {});
  for (const NodeInfo& n : nodes_) {
    const int cx = std::clamp(
        static_cast<int>((n.position.x - bounds_.min_x) / bucket_size_), 0,
        bucket_cols_ - 1);
    const int cy = std::clamp(
        static_cast<int>((n.position.y - bounds_.min_y) / bucket_size_), 0,
        bucket_rows_ - 1);
    buckets_[static_cast<std::size_t>(cy * bucket_cols_ + cx)].push_back(n.id);
  }
}

std::vector<NodeId> Topology::neighbors_within(NodeId id, double range_m) const {
  if (!(range_m > 0.0)) throw ContractViolation("neighbors_within: range must be > 0");
  const NodeInfo& self = node(id);
  std::vector<NodeId> out;
  const auto span = static_cast<int>(std::ceil(range_m / bucket_size_));
  const int cx = std::clamp(
      static_cast<int>((self.position.x - bounds_.min_x) / bucket_size_), 0,
      bucket_cols_ - 1);
  const int cy = std::clamp(
      static_cast<int>((self.position.y - bounds_.min_y) / bucket_size_), 0,
      bucket_rows_ - 1);
  const int x0 = std::max(0, cx - span);
  const int x1 = std::min(bucket_cols_ - 1, cx + span);
  const int y0 = std::max(0, cy - span);
  const int y1 = std::min(bucket_rows_ - 1, cy + span);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      for (NodeId other : buckets_[static_cast<std::size_t>(y * bucket_cols_ + x)]) {
        if (other == id) continue;
        if (distance(self.position, nodes_[other.index()].position) <= range_m) {
          out.push_back(other);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const Topology& a, const Topology& b) {
  if (a.cell_radius_m_ != b.cell_radius_m_ || !(a.base_station_ == b.base_station_) ||
      a.nodes_.size() != b.nodes_.size() || a.cells_.size() != b.cells_.size() ||
      a.clusters_.size() != b.clusters_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const NodeInfo& x = a.nodes_[i];
    const NodeInfo& y = b.nodes_[i];
    if (!(x.position == y.position) || x.hardware != y.hardware ||
        x.cell != y.cell || x.cluster != y.cluster) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.cells_.size(); ++i) {
    const Cell& x = a.cells_[i];
    const Cell& y = b.cells_[i];
    if (!(x.hex == y.hex) || !(x.center == y.center) ||
        x.member_ids != y.member_ids || x.cluster_id != y.cluster_id ||
        x.frequency_channel != y.frequency_channel) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.clusters_.size(); ++i) {
    const Cluster& x = a.clusters_[i];
    const Cluster& y = b.clusters_[i];
    if (x.cell_ids != y.cell_ids || x.head_cell_id != y.head_cell_id ||
        x.head_node != y.head_node) {
      return false;
    }
  }
  return true;
}

Topology generate_hex_mesh(const TopologyConfig& config) {
  if (config.clusters < 1) {
    throw ConfigError("topology.clusters", "must be at least 1");
  }
  if (!config.node_count && config.nodes_per_cell < 1) {
    throw ConfigError("topology.nodes_per_cell", "must be at least 1");
  }
  if (!(config.jitter >= 0.0 && config.jitter < 0.5)) {
    throw ConfigError("topology.jitter", "must lie in [0, 0.5)");
  }
  if (!(config.cell_radius_m > 0.0) || !std::isfinite(config.cell_radius_m)) {
    throw ConfigError("topology.cell_radius_m", "must be a positive number");
  }
  const std::size_t cell_count = static_cast<std::size_t>(config.clusters) * 7;
  if (config.node_count && *config.node_count < cell_count) {
    throw ConfigError("topology.node_count",
                      "must be at least 7 x clusters (one node per cell)");
  }

  const double radius = config.cell_radius_m;
  const double inner = radius * std::numbers::sqrt3 / 2.0;
  const double jitter_radius = config.jitter * radius;
  // Every node stays inside the disc of radius 0.8 * inradius, hence inside
  // its hexagon, after jitter is applied.
  const double anchor_radius = std::max(0.0, 0.8 * inner - jitter_radius);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));

  auto members_in = [&](std::size_t cell_index) -> std::uint32_t {
    if (!config.node_count) return config.nodes_per_cell;
    const auto total = *config.node_count;
    const auto base = static_cast<std::uint32_t>(total / cell_count);
    const auto extra = static_cast<std::uint32_t>(total % cell_count);
    return base + (cell_index < extra ? 1U : 0U);
  };

  RngStream placement(config.seed, stream::kPlacement);
  const auto centers = spiral(config.clusters);

  std::vector<NodeInfo> nodes;
  std::vector<Cell> cells;
  std::vector<Cluster> clusters;
  cells.reserve(cell_count);
  clusters.reserve(config.clusters);

  // Scratch topology math without a constructed Topology.
  const auto center_of = [&](HexCoord h) {
    return Position{radius * std::numbers::sqrt3 * (h.q + h.r / 2.0),
                    radius * 1.5 * h.r};
  };

  for (std::uint32_t k = 0; k < config.clusters; ++k) {
    const HexCoord super = centers[k];
    const HexCoord head_hex =
        add(scale(kClusterStepA, super.q), scale(kClusterStepB, super.r));
    Cluster cluster;
    cluster.id = ClusterId{k};
    std::array<HexCoord, 7> hexes{};
    hexes[0] = head_hex;
    for (std::size_t d = 0; d < 6; ++d) hexes[d + 1] = add(head_hex, kDirections[d]);

    for (std::size_t j = 0; j < 7; ++j) {
      Cell cell;
      cell.id = CellId{static_cast<std::uint32_t>(cells.size())};
      cell.hex = hexes[j];
      cell.center = center_of(hexes[j]);
      cell.cluster_id = cluster.id;
      const std::uint32_t count = members_in(cell.id.index());
      for (std::uint32_t m = 0; m < count; ++m) {
        Position anchor = cell.center;
        if (m > 0 && count > 1) {
          const double rr =
              anchor_radius * std::sqrt(static_cast<double>(m) / (count - 1));
          const double theta = golden_angle * m;
          anchor.x += rr * std::cos(theta);
          anchor.y += rr * std::sin(theta);
        }
        if (jitter_radius > 0.0) {
          const double theta = 2.0 * std::numbers::pi * placement.uniform01();
          const double rr = jitter_radius * std::sqrt(placement.uniform01());
          anchor.x += rr * std::cos(theta);
          anchor.y += rr * std::sin(theta);
        }
        NodeInfo n;
        n.id = NodeId{static_cast<std::uint32_t>(nodes.size())};
        n.position = anchor;
        n.cell = cell.id;
        n.cluster = cluster.id;
        n.hardware = (j == 0 && m == 0) ? HardwareClass::Sophisticated
                                        : HardwareClass::Primitive;
        cell.member_ids.push_back(n.id);
        nodes.push_back(n);
      }
      cluster.cell_ids[j] = cell.id;
      cells.push_back(std::move(cell));
    }
    cluster.head_cell_id = cluster.cell_ids[0];
    cluster.head_node = cells[cluster.head_cell_id.index()].member_ids.front();
    clusters.push_back(cluster);
  }

  Position base;
  if (config.base_station) {
    base = *config.base_station;
  } else {
    double min_x = cells.front().center.x;
    double max_x = min_x;
    double min_y = cells.front().center.y;
    for (const Cell& c : cells) {
      min_x = std::min(min_x, c.center.x - radius);
      max_x = std::max(max_x, c.center.x + radius);
      min_y = std::min(min_y, c.center.y - radius);
    }
    base = {(min_x + max_x) / 2.0, min_y - config.base_station_distance_m};
  }

  return Topology(radius, std::move(nodes), std::move(cells),
                  std::move(clusters), base);
}

ChannelPlan assign_channels(const Topology& topology) {
  const auto& cells = topology.cells();
  ChannelPlan plan;
  plan.cell_frequency.assign(cells.size(), -1);

  // Greedy coloring, cells in id order. Conflicts are hexagonal adjacency and
  // shared cluster membership. Each cell tries its lattice reuse color first
  // and walks upward from there, so a regular tiling lands on the 7-channel
  // reuse pattern.
  for (const Cell& c : cells) {
    std::set<ChannelIndex> used;
    for (const Cell& other : cells) {
      if (other.id == c.id) continue;
      const ChannelIndex ch = plan.cell_frequency[other.id.index()];
      if (ch < 0) continue;
      if (hex_distance(c.hex, other.hex) == 1 || other.cluster_id == c.cluster_id) {
        used.insert(ch);
      }
    }
    const ChannelIndex start = reuse_color(c.hex);
    ChannelIndex chosen = -1;
    for (ChannelIndex offset = 0; chosen < 0; ++offset) {
      // First the 7 reuse channels in cyclic order, then fresh ones.
      const ChannelIndex candidate =
          offset < 7 ? (start + offset) % 7 : offset;
      if (!used.contains(candidate)) chosen = candidate;
    }
    plan.cell_frequency[c.id.index()] = chosen;
  }

  plan.node_code.assign(topology.nodes().size(), -1);
  for (const Cell& c : cells) {
    std::vector<NodeId> members = c.member_ids;
    std::sort(members.begin(), members.end());
    CodeIndex code = 0;
    for (NodeId n : members) plan.node_code[n.index()] = code++;
  }
  return plan;
}

std::vector<NodeId> neighbors_within(const Topology& topology, NodeId id,
                                     double range_m) {
  return topology.neighbors_within(id, range_m);
}

}  // namespace sidle
