#pragma once

// Exhaustive reference implementations. These exist to check the fast
// paths and are deliberately independent of them: subset enumeration plus
// Kruskal, nothing shared with the moat-growing solver or the tuned
// projection. Guarded to small inputs.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gslr/graph.hpp"
#include "gslr/pcst.hpp"

namespace gslr {

namespace detail {

inline bool mask_connected(const FeatureGraph& g, std::uint32_t mask) {
  if (mask == 0) return false;
  const std::uint32_t start = static_cast<std::uint32_t>(__builtin_ctz(mask));
  std::uint32_t seen = 1u << start;
  std::vector<NodeId> stack{start};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (std::uint32_t e : g.incident(v)) {
      const NodeId w = g.other_end(e, v);
      const std::uint32_t bit = 1u << w;
      if ((mask & bit) && !(seen & bit)) {
        seen |= bit;
        stack.push_back(w);
      }
    }
  }
  return seen == mask;
}

// minimum spanning tree of the subgraph induced by mask; edges assumed to
// connect it. Ties broken by edge id.
inline double induced_mst(const PCSTInstance& inst, std::uint32_t mask,
                          const std::vector<std::uint32_t>& edges_by_cost,
                          std::vector<std::uint32_t>* tree_edges) {
  const FeatureGraph& g = *inst.graph;
  std::vector<NodeId> parent(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) parent[v] = v;
  auto find = [&](NodeId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  double total = 0.0;
  if (tree_edges) tree_edges->clear();
  for (std::uint32_t e : edges_by_cost) {
    const GraphEdge& ed = g.edge(e);
    if (!((mask >> ed.u) & 1u) || !((mask >> ed.v) & 1u)) continue;
    const NodeId ru = find(ed.u), rv = find(ed.v);
    if (ru == rv) continue;
    parent[ru] = rv;
    total += instance_edge_cost(inst, e);
    if (tree_edges) tree_edges->push_back(e);
  }
  return total;
}

}  // namespace detail

// Exact optimum over the empty selection and every connected node subset
// (single tree), by enumeration. Exponential; refuses graphs > 15 nodes.
inline PCSTSolution brute_force_pcst(const PCSTInstance& inst) {
  validate_instance(inst);
  if (inst.target_components != 1)
    throw InvalidInput("brute force supports target_components == 1 only");
  const FeatureGraph& g = *inst.graph;
  const std::uint32_t d = g.node_count();
  if (d > 15) throw InvalidInput("brute_force_pcst limited to 15 nodes, got " + std::to_string(d));

  std::vector<std::uint32_t> edges_by_cost(g.edge_count());
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) edges_by_cost[e] = e;
  std::stable_sort(edges_by_cost.begin(), edges_by_cost.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return instance_edge_cost(inst, a) < instance_edge_cost(inst, b);
                   });

  double total_prize = 0.0;
  for (double p : inst.prizes) total_prize += p;

  // empty selection: pay every prize, zero components
  double best_obj = inst.prize_scale * total_prize;
  std::uint32_t best_mask = 0;
  std::vector<std::uint32_t> best_edges;

  std::vector<std::uint32_t> scratch;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    if (!detail::mask_connected(g, mask)) continue;
    double kept = 0.0;
    for (std::uint32_t v = 0; v < d; ++v)
      if ((mask >> v) & 1u) kept += inst.prizes[v];
    const double edge_term = detail::induced_mst(inst, mask, edges_by_cost, &scratch);
    const double obj =
        inst.prize_scale * (total_prize - kept) + edge_term + inst.component_penalty;
    if (obj < best_obj) {
      best_obj = obj;
      best_mask = mask;
      best_edges = scratch;
    }
  }

  PCSTSolution sol;
  for (std::uint32_t v = 0; v < d; ++v)
    if ((best_mask >> v) & 1u) sol.nodes.push_back(v);
  std::sort(best_edges.begin(), best_edges.end());
  sol.edges = std::move(best_edges);
  sol.objective_value = evaluate_objective(inst, sol.nodes, sol.edges);
  return sol;
}

// Total weight of a minimum spanning tree of the whole graph, summed in
// ascending edge-id order. Errors if the graph is disconnected.
inline double mst_weight(const FeatureGraph& g) {
  std::vector<std::uint32_t> order(g.edge_count());
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return g.edge(a).cost < g.edge(b).cost;
  });
  std::vector<NodeId> parent(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) parent[v] = v;
  auto find = [&](NodeId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::vector<std::uint32_t> chosen;
  for (std::uint32_t e : order) {
    const NodeId ru = find(g.edge(e).u), rv = find(g.edge(e).v);
    if (ru == rv) continue;
    parent[ru] = rv;
    chosen.push_back(e);
  }
  if (chosen.size() + 1 != g.node_count()) throw InvalidInput("graph is not connected");
  std::sort(chosen.begin(), chosen.end());
  double total = 0.0;
  for (std::uint32_t e : chosen) total += g.edge(e).cost;
  return total;
}

// Exact projection support: the connected subset of size <= s maximizing
// retained squared mass. Ties go to the lexicographically smallest sorted
// member list. Guarded to d <= 12, s <= 4.
inline NodeSet exact_project_bruteforce(const FeatureGraph& g, const std::vector<double>& p,
                                        std::uint32_t s) {
  const std::uint32_t d = g.node_count();
  if (p.size() != d) throw InvalidInput("vector length does not match graph");
  if (d > 12 || s > 4)
    throw InvalidInput("exact_project_bruteforce limited to d <= 12 and s <= 4");
  if (s < 1) throw InvalidInput("sparsity must be >= 1");

  double best_mass = -1.0;
  NodeSet best;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    if (static_cast<std::uint32_t>(__builtin_popcount(mask)) > s) continue;
    if (!detail::mask_connected(g, mask)) continue;
    double mass = 0.0;
    NodeSet members;
    for (std::uint32_t v = 0; v < d; ++v) {
      if ((mask >> v) & 1u) {
        mass += p[v] * p[v];
        members.push_back(v);
      }
    }
    if (mass > best_mass ||
        (mass == best_mass &&
         std::lexicographical_compare(members.begin(), members.end(), best.begin(), best.end()))) {
      best_mass = mass;
      best = std::move(members);
    }
  }
  return best;
}

}  // namespace gslr
