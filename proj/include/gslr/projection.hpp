#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gslr/graph.hpp"
#include "gslr/pcst.hpp"

namespace gslr {

struct SparsityTarget {
  std::uint32_t s = 1;           // wanted support size
  double slack_fraction = 0.10;  // accept supports up to (1+slack)*s
};

struct ProjectionConfig {
  int max_bisection_steps = 30;
  double lambda_min = 1e-6;
  double lambda_max = 1e6;
  // With graph costs the instance tunes the costs the graph carries;
  // without, every edge gets base cost 1.
  bool use_graph_costs = true;
};

struct ProjectionResult {
  std::vector<double> projected;  // input restricted to support, 0 elsewhere
  NodeSet support;                // connected on the graph; size <= 6s+1
  double lambda_used = 0.0;       // final edge-cost multiplier
  int solver_calls = 0;
};

namespace detail {

// Marks articulation vertices of the live induced subgraph (iterative
// lowlink sweep from `start`). Assumes the live part is connected.
inline void mark_articulation(const FeatureGraph& g, const std::vector<char>& in, NodeId start,
                              std::vector<int>& disc, std::vector<int>& low,
                              std::vector<char>& art) {
  std::fill(disc.begin(), disc.end(), -1);
  std::fill(art.begin(), art.end(), 0);
  struct Frame {
    NodeId v;
    NodeId parent;
    std::size_t next_edge;
  };
  std::vector<Frame> stack;
  int clock = 0;
  int root_children = 0;
  disc[start] = low[start] = clock++;
  stack.push_back({start, start, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& inc = g.incident(f.v);
    if (f.next_edge < inc.size()) {
      const std::uint32_t e = inc[f.next_edge++];
      const NodeId w = g.other_end(e, f.v);
      if (!in[w] || w == f.parent) continue;
      if (disc[w] < 0) {
        disc[w] = low[w] = clock++;
        if (f.v == start) ++root_children;
        stack.push_back({w, f.v, 0});
      } else {
        low[f.v] = std::min(low[f.v], disc[w]);
      }
    } else {
      stack.pop_back();
      if (!stack.empty()) {
        Frame& up = stack.back();
        low[up.v] = std::min(low[up.v], low[f.v]);
        if (up.v != start && low[f.v] >= disc[up.v]) art[up.v] = 1;
      }
    }
  }
  art[start] = root_children >= 2 ? 1 : 0;
}

// Shrink a connected node set to at most `keep` nodes by repeatedly
// deleting the smallest-prize vertex whose removal keeps the induced
// subgraph connected, then strip any zero-prize fringe the same way.
// Keeps at least one node.
inline NodeSet shrink_connected(const FeatureGraph& g, const std::vector<double>& prizes,
                                const NodeSet& nodes, std::uint32_t keep) {
  if (nodes.empty()) return {};
  const std::uint32_t d = g.node_count();
  std::vector<char> in(d, 0);
  for (NodeId v : nodes) in[v] = 1;
  std::size_t size = nodes.size();
  NodeId probe = nodes.front();

  std::vector<int> disc(d), low(d);
  std::vector<char> art(d);
  auto remove_one = [&](bool zero_only) -> bool {
    if (size <= 1) return false;
    mark_articulation(g, in, probe, disc, low, art);
    NodeId pick = d;
    for (NodeId v : nodes) {
      if (!in[v] || art[v]) continue;
      if (zero_only && prizes[v] != 0.0) continue;
      if (pick == d || prizes[v] < prizes[pick]) pick = v;
    }
    if (pick == d) return false;
    in[pick] = 0;
    --size;
    if (probe == pick)
      for (NodeId v : nodes)
        if (in[v]) {
          probe = v;
          break;
        }
    return true;
  };

  while (size > keep && remove_one(false)) {
  }
  while (remove_one(true)) {
  }

  NodeSet out;
  for (NodeId v : nodes)
    if (in[v]) out.push_back(v);
  return out;
}

}  // namespace detail

// Approximate projection onto vectors whose support is a connected
// subgraph of g with about `target.s` nodes. Prizes are the squared
// entries normalized by the largest one; a bisection over a global
// edge-cost multiplier steers the solver's support size into the window
// [s, (1+slack)*s] and stops on the first hit. Every solution seen is
// shrunk to the window's upper edge, and the candidate retaining the
// most squared mass wins (ties to the lexicographically smallest
// support).
inline ProjectionResult project(const FeatureGraph& g, const std::vector<double>& p,
                                const SparsityTarget& target, const ProjectionConfig& config = {}) {
  const std::uint32_t d = g.node_count();
  if (p.size() != d)
    throw InvalidInput("vector length " + std::to_string(p.size()) +
                       " does not match graph with " + std::to_string(d) + " nodes");
  for (double x : p)
    if (!std::isfinite(x)) throw InvalidInput("projection input must be finite");
  if (target.s < 1 || target.s > d)
    throw InvalidInput("sparsity target must be in [1, " + std::to_string(d) + "]");
  if (!(target.slack_fraction >= 0.0)) throw InvalidInput("slack_fraction must be >= 0");

  ProjectionResult result;
  result.projected.assign(d, 0.0);

  double max_sq = 0.0;
  for (double x : p) max_sq = std::max(max_sq, x * x);
  if (max_sq == 0.0) return result;  // zero maps to zero

  std::vector<double> prizes(d);
  for (std::uint32_t i = 0; i < d; ++i) prizes[i] = (p[i] * p[i]) / max_sq;

  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = prizes;
  inst.prize_scale = 1.0;
  inst.component_penalty = 0.0;
  inst.target_components = 1;
  if (!config.use_graph_costs)
    inst.edge_costs = std::vector<double>(g.edge_count(), 1.0);

  const std::uint32_t window_lo = target.s;
  const std::uint32_t window_hi = std::max(
      window_lo, static_cast<std::uint32_t>(std::floor((1.0 + target.slack_fraction) *
                                                           static_cast<double>(target.s) +
                                                       1e-9)));

  int calls = 0;
  struct Candidate {
    PCSTSolution solution;
    double lambda = 0.0;
  };
  std::vector<Candidate> seen;
  NodeSet hit_support;
  double hit_lambda = 0.0;

  // Solve one multiplier, remember the solution, flag window hits.
  auto eval = [&](double lambda, bool* hit) -> std::uint32_t {
    inst.edge_cost_scale = lambda;
    PCSTSolution sol = solve_pcst(inst);
    ++calls;
    const auto size = static_cast<std::uint32_t>(sol.nodes.size());
    *hit = size >= window_lo && size <= window_hi;
    if (*hit) {
      hit_support = sol.nodes;
      hit_lambda = lambda;
    } else if (size > 0) {
      seen.push_back({std::move(sol), lambda});
    }
    return size;
  };

  bool hit = false;
  const std::uint32_t size_lo = eval(config.lambda_min, &hit);
  if (!hit) {
    const std::uint32_t size_hi = eval(config.lambda_max, &hit);
    if (!hit && size_lo > window_hi && size_hi < window_lo) {
      double lo = config.lambda_min;  // support too big here
      double hi = config.lambda_max;  // support too small here
      for (int step = 0; step < config.max_bisection_steps && !hit; ++step) {
        if (hi / lo < 1.0 + 1e-9) break;
        const double mid = std::sqrt(lo * hi);
        const std::uint32_t size = eval(mid, &hit);
        if (hit) break;
        if (size > window_hi) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }

  NodeSet support;
  double lambda_used = 0.0;
  double best_retained = -1.0;
  auto offer = [&](NodeSet cand, double lambda) {
    if (cand.empty()) return;
    double retained = 0.0;
    for (NodeId v : cand) retained += prizes[v];
    const bool better = retained > best_retained ||
                        (retained == best_retained &&
                         std::lexicographical_compare(cand.begin(), cand.end(),
                                                      support.begin(), support.end()));
    if (better) {
      best_retained = retained;
      support = std::move(cand);
      lambda_used = lambda;
    }
  };
  if (hit) offer(hit_support, hit_lambda);
  for (const Candidate& cand : seen)
    offer(detail::shrink_connected(g, prizes, cand.solution.nodes, window_hi), cand.lambda);
  if (support.empty()) {
    // every solution came back empty: keep the single strongest entry,
    // which is always admissible
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < d; ++i)
      if (prizes[i] > prizes[best]) best = i;
    support = {best};
    lambda_used = config.lambda_max;
  }

  result.support = std::move(support);
  result.lambda_used = lambda_used;
  result.solver_calls = calls;
  for (NodeId v : result.support) result.projected[v] = p[v];
  return result;
}

}  // namespace gslr
