#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sidle/energy.hpp"
#include "sidle/ids.hpp"
#include "sidle/topology.hpp"

namespace sidle {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Undirected graph with non-negative edge weights over vertices 0..n-1.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t vertices) : adjacency_(vertices) {}

  void add_edge(std::size_t a, std::size_t b, double weight);
  [[nodiscard]] std::size_t size() const { return adjacency_.size(); }
  [[nodiscard]] const std::vector<std::pair<std::size_t, double>>& edges(
      std::size_t v) const {
    return adjacency_[v];
  }

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

// Minimum-cost paths from every vertex to one target. Among equal-cost
// choices the lower-numbered next hop wins, so results are deterministic.
struct PathTree {
  std::size_t target = 0;
  std::vector<double> cost;             // kUnreachable when disconnected
  std::vector<std::size_t> next_hop;    // == self for target and unreachable

  [[nodiscard]] bool reachable(std::size_t v) const { return cost[v] != kUnreachable; }
  // Vertices from v to the target inclusive; empty when unreachable.
  [[nodiscard]] std::vector<std::size_t> path(std::size_t v) const;
};

[[nodiscard]] PathTree shortest_paths_to(const WeightedGraph& graph, std::size_t target);

struct RoutedNode {
  NodeId id;
  Position position;
};

struct HeadRoute {
  NodeId head;
  bool reachable = false;
  std::vector<NodeId> path;  // head ... master
  double cost_j = 0.0;       // sum of per-hop tx costs
};

struct RoutingPlan {
  NodeId master;
  std::vector<HeadRoute> routes;  // in input order
  double base_hop_cost_j = 0.0;

  [[nodiscard]] const HeadRoute& route_of(NodeId head) const;
};

// Minimum total transmit energy routes from every live head to the master
// over hops no longer than range_m; each edge weighs the tx cost of one
// record over that hop. The master then uplinks to the base station.
[[nodiscard]] RoutingPlan plan_routes_to_base(std::span<const RoutedNode> heads,
                                              NodeId master, Position base_station,
                                              std::size_t record_bytes,
                                              const RadioCostModel& cost,
                                              double range_m);

}  // namespace sidle
