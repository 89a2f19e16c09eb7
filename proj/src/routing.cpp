#include "sidle/routing.hpp"

#include <queue>

#include "sidle/errors.hpp"

namespace sidle {

void WeightedGraph::add_edge(std::size_t a, std::size_t b, double weight) {
  if (a >= size() || b >= size()) throw ContractViolation("add_edge: vertex out of range");
  if (!(weight >= 0.0)) throw ContractViolation("add_edge: negative weight");
  adjacency_[a].emplace_back(b, weight);
  adjacency_[b].emplace_back(a, weight);
}

std::vector<std::size_t> PathTree::path(std::size_t v) const {
  std::vector<std::size_t> out;
  if (!reachable(v)) return out;
  out.push_back(v);
  while (v != target) {
    v = next_hop[v];
    out.push_back(v);
  }
  return out;
}

PathTree shortest_paths_to(const WeightedGraph& graph, std::size_t target) {
  const std::size_t n = graph.size();
  if (target >= n) throw ContractViolation("shortest_paths_to: target out of range");
  PathTree tree;
  tree.target = target;
  tree.cost.assign(n, kUnreachable);
  tree.next_hop.resize(n);
  for (std::size_t v = 0; v < n; ++v) tree.next_hop[v] = v;
  tree.cost[target] = 0.0;

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::vector<bool> done(n, false);
  open.emplace(0.0, target);
  while (!open.empty()) {
    const auto [c, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    for (const auto& [v, w] : graph.edges(u)) {
      if (done[v]) continue;
      const double candidate = c + w;
      // Relaxing from the target outwards, so u is v's next hop.
      if (candidate < tree.cost[v] ||
          (candidate == tree.cost[v] && u < tree.next_hop[v])) {
        tree.cost[v] = candidate;
        tree.next_hop[v] = u;
        open.emplace(candidate, v);
      }
    }
  }
  return tree;
}

const HeadRoute& RoutingPlan::route_of(NodeId head) const {
  for (const HeadRoute& r : routes) {
    if (r.head == head) return r;
  }
  throw LookupError("routing plan has no head " + std::to_string(head.value));
}

RoutingPlan plan_routes_to_base(std::span<const RoutedNode> heads, NodeId master,
                                Position base_station, std::size_t record_bytes,
                                const RadioCostModel& cost, double range_m) {
  std::size_t target = heads.size();
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i].id == master) target = i;
  }
  if (target == heads.size()) {
    throw ContractViolation("plan_routes_to_base: master is not among the heads");
  }
  WeightedGraph graph(heads.size());
  for (std::size_t a = 0; a < heads.size(); ++a) {
    for (std::size_t b = a + 1; b < heads.size(); ++b) {
      const double d = distance(heads[a].position, heads[b].position);
      if (d <= range_m) graph.add_edge(a, b, tx_cost(cost, record_bytes, d));
    }
  }
  const PathTree tree = shortest_paths_to(graph, target);

  RoutingPlan plan;
  plan.master = master;
  plan.base_hop_cost_j =
      tx_cost(cost, record_bytes, distance(heads[target].position, base_station));
  for (std::size_t i = 0; i < heads.size(); ++i) {
    HeadRoute r;
    r.head = heads[i].id;
    r.reachable = tree.reachable(i);
    if (r.reachable) {
      r.cost_j = tree.cost[i];
      for (std::size_t v : tree.path(i)) r.path.push_back(heads[v].id);
    }
    plan.routes.push_back(std::move(r));
  }
  return plan;
}

}  // namespace sidle
