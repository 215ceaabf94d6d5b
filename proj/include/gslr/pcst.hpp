#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "gslr/graph.hpp"

namespace gslr {

// Minimize  prize_scale * sum_{v not in F} prizes[v]
//         + sum_{e in F} cost(e)
//         + component_penalty * (#tree components of F).
//
// edge_costs, when set, replaces the graph's costs (same edge order);
// edge_cost_scale multiplies whichever base costs are in effect. The
// projection uses the scale as its tuning knob.
struct PCSTInstance {
  const FeatureGraph* graph = nullptr;
  std::vector<double> prizes;
  double prize_scale = 1.0;        // beta
  double component_penalty = 0.0;  // omega
  int target_components = 1;       // kappa
  std::optional<std::vector<double>> edge_costs;
  double edge_cost_scale = 1.0;
};

struct PCSTSolution {
  NodeSet nodes;
  std::vector<std::uint32_t> edges;  // edge ids, ascending
  double objective_value = 0.0;
};

inline void validate_instance(const PCSTInstance& inst) {
  if (inst.graph == nullptr) throw InvalidInput("instance has no graph");
  if (inst.prizes.size() != inst.graph->node_count())
    throw InvalidInput("prize vector length " + std::to_string(inst.prizes.size()) +
                       " does not match graph with " + std::to_string(inst.graph->node_count()) +
                       " nodes");
  for (double p : inst.prizes)
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("prizes must be finite and >= 0");
  if (!(inst.prize_scale >= 0.0) || !std::isfinite(inst.prize_scale))
    throw InvalidInput("prize_scale must be finite and >= 0");
  if (!(inst.component_penalty >= 0.0) || !std::isfinite(inst.component_penalty))
    throw InvalidInput("component_penalty must be finite and >= 0");
  if (inst.target_components < 1) throw InvalidInput("target_components must be >= 1");
  if (inst.edge_costs && inst.edge_costs->size() != inst.graph->edge_count())
    throw InvalidInput("edge cost override length does not match edge count");
  if (!(inst.edge_cost_scale >= 0.0) || !std::isfinite(inst.edge_cost_scale))
    throw InvalidInput("edge_cost_scale must be finite and >= 0");
}

inline double instance_edge_cost(const PCSTInstance& inst, std::uint32_t e) {
  const double base = inst.edge_costs ? (*inst.edge_costs)[e] : inst.graph->edge(e).cost;
  return inst.edge_cost_scale * base;
}

// Objective of an explicit (nodes, edges) selection. Edges must have both
// endpoints inside nodes. The component count is whatever the selection
// induces; no forest check is performed here.
inline double evaluate_objective(const PCSTInstance& inst, const NodeSet& nodes,
                                 const std::vector<std::uint32_t>& edges) {
  validate_instance(inst);
  const FeatureGraph& g = *inst.graph;
  std::vector<std::uint8_t> in_sol(g.node_count(), 0);
  for (NodeId v : nodes) {
    if (v >= g.node_count()) throw InvalidInput("solution node out of range");
    in_sol[v] = 1;
  }
  // union-find over solution nodes to count components
  std::vector<NodeId> parent(g.node_count());
  for (NodeId v : nodes) parent[v] = v;
  auto find = [&](NodeId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  double edge_term = 0.0;
  std::size_t merges = 0;
  for (std::uint32_t e : edges) {
    if (e >= g.edge_count()) throw InvalidInput("solution edge id out of range");
    const GraphEdge& ed = g.edge(e);
    if (!in_sol[ed.u] || !in_sol[ed.v])
      throw InvalidInput("solution edge {" + g.node_name(ed.u) + ", " + g.node_name(ed.v) +
                         "} has an endpoint outside the solution nodes");
    edge_term += instance_edge_cost(inst, e);
    const NodeId ru = find(ed.u), rv = find(ed.v);
    if (ru != rv) {
      parent[ru] = rv;
      ++merges;
    }
  }
  double excluded = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (!in_sol[v]) excluded += inst.prizes[v];
  const double components = static_cast<double>(nodes.size() - merges);
  return inst.prize_scale * excluded + edge_term + inst.component_penalty * components;
}

namespace detail {

// Moat-growing state. Clusters form a merge tree: leaves are nodes, inner
// clusters are created by edge merges. Once a cluster gains a parent its
// dual value is frozen, which makes path sums safe to compress.
struct MoatCluster {
  std::int32_t parent = -1;
  double path_sum = 0.0;  // own frozen dual + frozen duals of compressed ancestors
  double moat = 0.0;      // dual grown by this cluster itself
  double active_since = 0.0;
  double remaining = 0.0;  // prize potential left, valid while root
  bool active = false;
  std::vector<std::uint32_t> bag;  // superset of incident edge ids
};

struct GrowthEvent {
  double time;
  std::uint8_t kind;  // 0 = edge tightens, 1 = cluster deactivates
  std::uint32_t index;
  std::uint32_t stamp;
};

struct GrowthEventAfter {
  bool operator()(const GrowthEvent& a, const GrowthEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.index != b.index) return a.index > b.index;
    return a.stamp > b.stamp;
  }
};

constexpr double kEventTolerance = 1e-12;

class MoatGrowth {
 public:
  explicit MoatGrowth(const PCSTInstance& inst) : inst_(inst), g_(*inst.graph) {
    const std::uint32_t d = g_.node_count();
    clusters_.resize(d);
    edge_stamp_.assign(g_.edge_count(), 0);
    for (NodeId v = 0; v < d; ++v) {
      MoatCluster& c = clusters_[v];
      c.remaining = inst_.prize_scale * inst_.prizes[v];
      c.active = c.remaining > 0.0;
      c.bag = g_.incident(v);
      if (c.active) queue_.push({c.remaining, 1, v, 0});
    }
    for (std::uint32_t e = 0; e < g_.edge_count(); ++e) schedule_edge(e, 0.0);
  }

  // Runs the clock until every cluster is inactive. Returns the merge
  // edges grouped implicitly by the final merge forest.
  std::vector<std::uint32_t> run() {
    std::vector<std::uint32_t> forest;
    while (!queue_.empty()) {
      const GrowthEvent ev = queue_.top();
      queue_.pop();
      if (ev.kind == 0) {
        handle_edge_event(ev, forest);
      } else {
        handle_deactivation(ev);
      }
    }
    return forest;
  }

  std::uint32_t root_of(NodeId v) { return find(v).first; }

 private:
  std::pair<std::uint32_t, double> find(std::uint32_t c) {
    // iterative find with path compression over frozen path sums
    std::uint32_t walk = c;
    while (clusters_[walk].parent >= 0) walk = static_cast<std::uint32_t>(clusters_[walk].parent);
    const std::uint32_t root = walk;
    // second pass: accumulate from the top down so each link's sum is final
    // before it is folded into descendants
    compress(c, root);
    return {root, clusters_[c].parent >= 0 ? clusters_[c].path_sum : 0.0};
  }

  void compress(std::uint32_t c, std::uint32_t root) {
    // fold links bottom-up; recursion depth = current path length
    if (clusters_[c].parent < 0) return;
    const std::uint32_t p = static_cast<std::uint32_t>(clusters_[c].parent);
    if (p == root) return;
    compress(p, root);
    clusters_[c].path_sum += clusters_[p].path_sum;
    clusters_[c].parent = static_cast<std::int32_t>(root);
  }

  double moat_at(std::uint32_t root, double t) const {
    const MoatCluster& c = clusters_[root];
    return c.moat + (c.active ? t - c.active_since : 0.0);
  }

  // Charge accumulated against edge e by both endpoint chains at time t,
  // plus the growth rate. Returns false if the edge is internal.
  bool edge_state(std::uint32_t e, double t, double& slack, int& rate, std::uint32_t& ru,
                  std::uint32_t& rv) {
    const GraphEdge& ed = g_.edge(e);
    auto [a, sa] = find(ed.u);
    auto [b, sb] = find(ed.v);
    if (a == b) return false;
    ru = a;
    rv = b;
    const double charged = sa + moat_at(a, t) + sb + moat_at(b, t);
    slack = instance_edge_cost(inst_, e) - charged;
    rate = (clusters_[a].active ? 1 : 0) + (clusters_[b].active ? 1 : 0);
    return true;
  }

  void schedule_edge(std::uint32_t e, double t) {
    double slack;
    int rate;
    std::uint32_t ru, rv;
    if (!edge_state(e, t, slack, rate, ru, rv)) return;
    if (rate == 0) return;  // dormant; the bags re-examine it on a wake-up merge
    const double when = t + std::max(slack, 0.0) / rate;
    queue_.push({when, 0, e, ++edge_stamp_[e]});
  }

  void finalize_root(std::uint32_t r, double t) {
    MoatCluster& c = clusters_[r];
    if (c.active) {
      c.moat += t - c.active_since;
      c.remaining = std::max(0.0, c.remaining - (t - c.active_since));
      c.active_since = t;
    }
  }

  void handle_edge_event(const GrowthEvent& ev, std::vector<std::uint32_t>& forest) {
    const std::uint32_t e = ev.index;
    if (ev.stamp != edge_stamp_[e]) return;  // superseded
    double slack;
    int rate;
    std::uint32_t ru, rv;
    if (!edge_state(e, ev.time, slack, rate, ru, rv)) return;
    if (rate == 0) return;
    if (slack > kEventTolerance) {
      // a moat slowed down since this was scheduled
      queue_.push({ev.time + slack / rate, 0, e, ++edge_stamp_[e]});
      return;
    }
    merge(e, ru, rv, ev.time, forest);
  }

  void merge(std::uint32_t e, std::uint32_t ru, std::uint32_t rv, double t,
             std::vector<std::uint32_t>& forest) {
    finalize_root(ru, t);
    finalize_root(rv, t);
    const bool ru_was_active = clusters_[ru].active;
    const bool rv_was_active = clusters_[rv].active;

    const std::uint32_t nc = static_cast<std::uint32_t>(clusters_.size());
    clusters_.emplace_back();
    MoatCluster& merged = clusters_[nc];
    merged.remaining = clusters_[ru].remaining + clusters_[rv].remaining;
    merged.active = merged.remaining > 0.0;
    merged.active_since = t;

    clusters_[ru].active = false;
    clusters_[rv].active = false;
    clusters_[ru].parent = static_cast<std::int32_t>(nc);
    clusters_[ru].path_sum = clusters_[ru].moat;
    clusters_[rv].parent = static_cast<std::int32_t>(nc);
    clusters_[rv].path_sum = clusters_[rv].moat;

    forest.push_back(e);
    if (merged.active) queue_.push({t + merged.remaining, 1, nc, 0});

    // Edges incident to a side that was not growing speed up now; their
    // queued times would be too late, so they are rescheduled eagerly.
    if (merged.active && ru_was_active != rv_was_active) {
      const std::uint32_t sleeping = ru_was_active ? rv : ru;
      for (std::uint32_t f : clusters_[sleeping].bag) schedule_edge(f, t);
    }
    std::vector<std::uint32_t>& big =
        clusters_[ru].bag.size() >= clusters_[rv].bag.size() ? clusters_[ru].bag
                                                             : clusters_[rv].bag;
    std::vector<std::uint32_t>& small =
        clusters_[ru].bag.size() >= clusters_[rv].bag.size() ? clusters_[rv].bag
                                                             : clusters_[ru].bag;
    big.insert(big.end(), small.begin(), small.end());
    merged.bag = std::move(big);
    small.clear();
    small.shrink_to_fit();
  }

  void handle_deactivation(const GrowthEvent& ev) {
    MoatCluster& c = clusters_[ev.index];
    if (c.parent >= 0 || !c.active) return;  // merged away or already inactive
    c.moat += ev.time - c.active_since;
    c.active_since = ev.time;
    c.remaining = 0.0;
    c.active = false;
    // Queued edge events on this cluster are now too early; they will be
    // re-checked (and re-pushed or parked) when they pop.
  }

  const PCSTInstance& inst_;
  const FeatureGraph& g_;
  std::vector<MoatCluster> clusters_;
  std::vector<std::uint32_t> edge_stamp_;
  std::priority_queue<GrowthEvent, std::vector<GrowthEvent>, GrowthEventAfter> queue_;
};

// Best net-prize subtree of one merge-forest component, found by rooting
// the tree once and rerooting with a second pass.
struct PrunedTree {
  double net = 0.0;  // max over subtrees of (prize mass - edge cost)
  NodeSet nodes;
  std::vector<std::uint32_t> edges;
};

inline PrunedTree strong_prune(const PCSTInstance& inst, const std::vector<NodeId>& comp_nodes,
                               const std::vector<std::uint32_t>& comp_edges) {
  const FeatureGraph& g = *inst.graph;
  // local adjacency: node -> (neighbor, edge id)
  std::unordered_map<NodeId, std::vector<std::pair<NodeId, std::uint32_t>>> adj;
  for (NodeId v : comp_nodes) adj[v] = {};
  for (std::uint32_t e : comp_edges) {
    const GraphEdge& ed = g.edge(e);
    adj[ed.u].emplace_back(ed.v, e);
    adj[ed.v].emplace_back(ed.u, e);
  }
  const NodeId root = *std::min_element(comp_nodes.begin(), comp_nodes.end());

  // rooted orientation via BFS order
  std::vector<NodeId> order;
  order.reserve(comp_nodes.size());
  std::unordered_map<NodeId, NodeId> parent_of;
  std::unordered_map<NodeId, std::uint32_t> parent_edge;
  parent_of[root] = root;
  order.push_back(root);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId v = order[i];
    for (auto [w, e] : adj[v]) {
      if (parent_of.count(w)) continue;
      parent_of[w] = v;
      parent_edge[w] = e;
      order.push_back(w);
    }
  }

  auto prize = [&](NodeId v) { return inst.prize_scale * inst.prizes[v]; };
  auto cost = [&](std::uint32_t e) { return instance_edge_cost(inst, e); };

  // down[v]: best net mass of a subtree rooted at v inside v's rooted branch
  std::unordered_map<NodeId, double> down, up, parent_side;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    double acc = prize(v);
    for (auto [w, e] : adj[v]) {
      if (parent_of[w] != v || w == v) continue;
      acc += std::max(0.0, down[w] - cost(e));
    }
    down[v] = acc;
  }
  // up[v]: best net mass reachable through v's parent, after paying the
  // parent edge; parent_side[v]: same mass before paying that edge
  up[root] = 0.0;
  parent_side[root] = 0.0;
  for (const NodeId v : order) {
    for (auto [w, e] : adj[v]) {
      if (parent_of[w] != v || w == v) continue;
      const double through = up[v] + down[v] - std::max(0.0, down[w] - cost(e));
      parent_side[w] = through;
      up[w] = std::max(0.0, through - cost(e));
    }
  }

  NodeId best = root;
  double best_net = -1.0;
  for (const NodeId v : order) {
    const double net = down[v] + up[v];
    if (net > best_net || (net == best_net && v < best)) {
      best_net = net;
      best = v;
    }
  }

  // extract: walk outward from the best root, keeping branches whose side
  // value strictly beats the connecting edge cost
  PrunedTree out;
  out.net = best_net;
  std::vector<NodeId> stack{best};
  std::unordered_map<NodeId, std::uint8_t> taken;
  taken[best] = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    out.nodes.push_back(v);
    for (auto [w, e] : adj[v]) {
      if (taken.count(w)) continue;
      const double side = parent_of[w] == v ? down[w] : parent_side[v];
      if (side - cost(e) > 0.0) {
        taken[w] = 1;
        out.edges.push_back(e);
        stack.push_back(w);
      }
    }
  }
  std::sort(out.nodes.begin(), out.nodes.end());
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

}  // namespace detail

// Goemans-Williamson moat growing followed by strong pruning; unrooted,
// single-tree output (target_components must be 1). Empty output is valid
// when no subtree is worth its connection cost. Deterministic: ties are
// processed by ascending (edge index, cluster index).
inline PCSTSolution solve_pcst(const PCSTInstance& inst) {
  validate_instance(inst);
  if (inst.target_components != 1)
    throw InvalidInput("solver supports target_components == 1 only");
  const FeatureGraph& g = *inst.graph;

  detail::MoatGrowth growth(inst);
  const std::vector<std::uint32_t> forest = growth.run();

  // group nodes and merge edges by final merge-forest component
  std::unordered_map<std::uint32_t, std::vector<NodeId>> comp_nodes;
  for (NodeId v = 0; v < g.node_count(); ++v) comp_nodes[growth.root_of(v)].push_back(v);
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> comp_edges;
  for (std::uint32_t e : forest) comp_edges[growth.root_of(g.edge(e).u)].push_back(e);

  // deterministic component order: by smallest node id
  std::vector<std::pair<NodeId, std::uint32_t>> comps;
  comps.reserve(comp_nodes.size());
  for (auto& [root, nodes] : comp_nodes) {
    std::sort(nodes.begin(), nodes.end());
    comps.emplace_back(nodes.front(), root);
  }
  std::sort(comps.begin(), comps.end());

  detail::PrunedTree best;
  best.net = 0.0;  // the empty selection
  for (auto [lead, root] : comps) {
    detail::PrunedTree t = detail::strong_prune(inst, comp_nodes[root], comp_edges[root]);
    if (t.net > best.net &&
        t.net > inst.component_penalty) {  // one tree costs one component penalty
      best = std::move(t);
    }
  }

  PCSTSolution sol;
  if (best.nodes.empty() || best.net <= inst.component_penalty) {
    sol.nodes = {};
    sol.edges = {};
  } else {
    sol.nodes = std::move(best.nodes);
    sol.edges = std::move(best.edges);
  }
  sol.objective_value = evaluate_objective(inst, sol.nodes, sol.edges);
  return sol;
}

}  // namespace gslr
