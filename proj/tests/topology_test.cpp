#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sidle/errors.hpp"
#include "sidle/topology.hpp"

using namespace sidle;

namespace {

TopologyConfig mesh(std::uint32_t clusters, std::uint32_t per_cell, double jitter = 0.3,
                    std::uint64_t seed = 1) {
  TopologyConfig c;
  c.clusters = clusters;
  c.nodes_per_cell = per_cell;
  c.jitter = jitter;
  c.seed = seed;
  return c;
}

// One cell holding every node at the given positions.
Topology single_cell(const std::vector<Position>& at) {
  std::vector<NodeInfo> nodes;
  Cell cell;
  cell.id = CellId{0};
  cell.cluster_id = ClusterId{0};
  for (std::uint32_t i = 0; i < at.size(); ++i) {
    NodeInfo n;
    n.id = NodeId{i};
    n.position = at[i];
    n.cell = CellId{0};
    n.cluster = ClusterId{0};
    nodes.push_back(n);
    cell.member_ids.push_back(NodeId{i});
  }
  return Topology(100.0, std::move(nodes), {cell}, {}, Position{0, 1000});
}

}  // namespace

TEST(HexMesh, ZeroJitterPutsNodesOnCenters) {
  const Topology t = generate_hex_mesh(mesh(1, 1, 0.0));
  ASSERT_EQ(t.cells().size(), 7u);
  ASSERT_EQ(t.node_count(), 7u);
  for (const NodeInfo& n : t.nodes()) {
    const Cell& c = t.cell(n.cell);
    EXPECT_DOUBLE_EQ(n.position.x, c.center.x);
    EXPECT_DOUBLE_EQ(n.position.y, c.center.y);
  }
}

TEST(HexMesh, FourPerCellGivesThreeFollowersPerLeader) {
  const Topology t = generate_hex_mesh(mesh(1, 4));
  EXPECT_EQ(t.node_count(), 28u);
  for (const Cell& c : t.cells()) EXPECT_EQ(c.member_ids.size(), 4u);
}

TEST(HexMesh, SameSeedSameLayout) {
  const Topology a = generate_hex_mesh(mesh(2, 7, 0.3, 99));
  const Topology b = generate_hex_mesh(mesh(2, 7, 0.3, 99));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(topology_to_text(a), topology_to_text(b));
  const Topology c = generate_hex_mesh(mesh(2, 7, 0.3, 100));
  EXPECT_FALSE(a == c);
}

TEST(HexMesh, RejectsBadConfig) {
  EXPECT_THROW((void)generate_hex_mesh(mesh(0, 7)), ConfigError);
  EXPECT_THROW((void)generate_hex_mesh(mesh(1, 0)), ConfigError);
  EXPECT_THROW((void)generate_hex_mesh(mesh(1, 7, 0.5)), ConfigError);
  EXPECT_THROW((void)generate_hex_mesh(mesh(1, 7, -0.1)), ConfigError);
  try {
    (void)generate_hex_mesh(mesh(1, 7, 0.7));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "topology.jitter");
  }
}

TEST(HexMesh, NodeCountSpreadsOverCells) {
  TopologyConfig c = mesh(2, 7);
  c.node_count = 100;
  const Topology t = generate_hex_mesh(c);
  EXPECT_EQ(t.node_count(), 100u);
  std::size_t total = 0;
  for (const Cell& cell : t.cells()) {
    EXPECT_GE(cell.member_ids.size(), 7u);
    EXPECT_LE(cell.member_ids.size(), 8u);
    total += cell.member_ids.size();
  }
  EXPECT_EQ(total, 100u);
}

TEST(HexMesh, PartitionIsTotal) {
  const Topology t = generate_hex_mesh(mesh(3, 5));
  std::vector<int> seen(t.node_count(), 0);
  for (const Cell& c : t.cells()) {
    for (NodeId m : c.member_ids) {
      ++seen[m.index()];
      EXPECT_EQ(t.node(m).cell, c.id);
      EXPECT_EQ(t.node(m).cluster, c.cluster_id);
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  std::vector<int> cell_seen(t.cells().size(), 0);
  for (const Cluster& k : t.clusters()) {
    EXPECT_EQ(k.cell_ids[0], k.head_cell_id);
    for (CellId c : k.cell_ids) {
      ++cell_seen[c.index()];
      EXPECT_EQ(t.cell(c).cluster_id, k.id);
    }
    EXPECT_EQ(t.node(k.head_node).hardware, HardwareClass::Sophisticated);
    EXPECT_EQ(t.node(k.head_node).cell, k.head_cell_id);
  }
  for (int s : cell_seen) EXPECT_EQ(s, 1);
}

TEST(HexMesh, HeadCellIsSurroundedByItsCluster) {
  const Topology t = generate_hex_mesh(mesh(2, 3));
  for (const Cluster& k : t.clusters()) {
    const HexCoord centre = t.cell(k.head_cell_id).hex;
    for (std::size_t i = 1; i < 7; ++i) {
      EXPECT_EQ(hex_distance(centre, t.cell(k.cell_ids[i]).hex), 1);
    }
  }
}

TEST(Channels, IsolatedCellUsesChannelZero) {
  const Topology t = single_cell({{0, 0}, {10, 0}, {0, 10}, {5, 5}});
  const ChannelPlan& p = t.channel_plan();
  EXPECT_EQ(p.cell_frequency.at(0), 0);
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_EQ(p.node_code.at(i), static_cast<int>(i));
}

TEST(Channels, OneClusterHasSevenDistinctChannels) {
  const Topology t = generate_hex_mesh(mesh(1, 2));
  const ChannelPlan& p = t.channel_plan();
  std::set<ChannelIndex> used(p.cell_frequency.begin(), p.cell_frequency.end());
  EXPECT_EQ(used.size(), 7u);
  // 6 spokes plus 6 rim edges around the centre.
  int adjacent_pairs = 0;
  for (std::size_t a = 0; a < 7; ++a) {
    for (std::size_t b = a + 1; b < 7; ++b) {
      if (hex_distance(t.cells()[a].hex, t.cells()[b].hex) != 1) continue;
      ++adjacent_pairs;
      EXPECT_NE(p.cell_frequency[a], p.cell_frequency[b]);
    }
  }
  EXPECT_EQ(adjacent_pairs, 12);
}

TEST(Channels, AdjacentCellsDifferAcrossClusters) {
  for (std::uint32_t clusters : {2u, 3u, 5u}) {
    const Topology t = generate_hex_mesh(mesh(clusters, 2));
    const ChannelPlan& p = t.channel_plan();
    int cross = 0;
    for (std::size_t a = 0; a < t.cells().size(); ++a) {
      for (std::size_t b = a + 1; b < t.cells().size(); ++b) {
        if (hex_distance(t.cells()[a].hex, t.cells()[b].hex) != 1) continue;
        EXPECT_NE(p.cell_frequency[a], p.cell_frequency[b]) << a << "," << b;
        if (t.cells()[a].cluster_id != t.cells()[b].cluster_id) ++cross;
        EXPECT_TRUE(t.cells_adjacent(CellId{static_cast<std::uint32_t>(a)},
                                     CellId{static_cast<std::uint32_t>(b)}));
      }
    }
    EXPECT_GT(cross, 0) << "clusters should touch";
  }
}

TEST(Channels, CodesUniqueWithinCell) {
  TopologyConfig c = mesh(2, 7);
  c.node_count = 100;
  const Topology t = generate_hex_mesh(c);
  for (const Cell& cell : t.cells()) {
    std::set<CodeIndex> codes;
    for (NodeId m : cell.member_ids) codes.insert(t.channel_plan().node_code[m.index()]);
    EXPECT_EQ(codes.size(), cell.member_ids.size());
  }
}

TEST(Neighbors, TinyRangeFindsNobody) {
  const Topology t = generate_hex_mesh(mesh(1, 4));
  for (const NodeInfo& n : t.nodes()) EXPECT_TRUE(neighbors_within(t, n.id, 0.001).empty());
}

TEST(Neighbors, DiagonalRangeFindsEveryone) {
  const Topology t = generate_hex_mesh(mesh(2, 3));
  const double r = t.bounds().diagonal();
  for (const NodeInfo& n : t.nodes()) {
    const auto got = neighbors_within(t, n.id, r);
    EXPECT_EQ(got.size(), t.node_count() - 1);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  }
}

TEST(Neighbors, MatchesBruteForce) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  std::vector<Position> at;
  for (int i = 0; i < 20; ++i) at.push_back({u(gen), u(gen)});
  const Topology t = single_cell(at);
  for (double range : {50.0, 10.0, 120.0}) {
    for (std::uint32_t i = 0; i < at.size(); ++i) {
      std::vector<NodeId> want;
      for (std::uint32_t j = 0; j < at.size(); ++j) {
        const double d = std::hypot(at[i].x - at[j].x, at[i].y - at[j].y);
        if (j != i && d <= range) want.push_back(NodeId{j});
      }
      EXPECT_EQ(neighbors_within(t, NodeId{i}, range), want) << "node " << i;
    }
  }
}

TEST(Neighbors, UnknownNodeIsLookupError) {
  const Topology t = generate_hex_mesh(mesh(1, 1));
  EXPECT_THROW((void)neighbors_within(t, NodeId{7}, 10.0), LookupError);
  EXPECT_THROW((void)t.node(NodeId{99}), LookupError);
}

TEST(TopologyFile, RoundTrip) {
  TopologyConfig c = mesh(2, 7, 0.3, 5);
  c.node_count = 100;
  const Topology t = generate_hex_mesh(c);
  const std::string text = topology_to_text(t);
  const Topology back = topology_from_text(text);
  EXPECT_TRUE(back == t);
  EXPECT_EQ(topology_to_text(back), text);
}

TEST(TopologyFile, MalformedIsConfigError) {
  EXPECT_THROW((void)topology_from_text("{not json"), ConfigError);
  EXPECT_THROW((void)topology_from_text(R"({"format":"other","version":1})"), ConfigError);
  EXPECT_THROW((void)load_topology("/nonexistent/dir/topology.json"), IoError);
}
