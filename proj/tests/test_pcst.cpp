#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gslr/exhaustive.hpp"
#include "gslr/pcst.hpp"
#include "gslr/random.hpp"

using namespace gslr;

namespace {

FeatureGraph random_graph(Rng& rng, std::uint32_t n, double edge_prob) {
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  std::vector<GraphEdge> edges;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      if (rng.uniform01() < edge_prob) edges.push_back({u, v, rng.uniform(0.0, 5.0)});
  return FeatureGraph(names, edges);
}

std::size_t component_count(const FeatureGraph& g, const PCSTSolution& sol) {
  if (sol.nodes.empty()) return 0;
  std::vector<NodeId> parent(g.node_count());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<NodeId>(i);
  std::function<NodeId(NodeId)> find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::uint32_t e : sol.edges) parent[find(g.edge(e).u)] = find(g.edge(e).v);
  std::vector<NodeId> roots;
  for (NodeId v : sol.nodes) roots.push_back(find(v));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots.size();
}

}  // namespace

TEST_CASE("objective evaluates prizes, costs, and components", "[pcst]") {
  const FeatureGraph g({"a", "b"}, {{0, 1, 3.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {5.0, 1.0};

  PCSTSolution both;
  both.nodes = {0, 1};
  both.edges = {0};
  CHECK(evaluate_objective(inst, both.nodes, both.edges) == 3.0);

  PCSTSolution only0;
  only0.nodes = {0};
  CHECK(evaluate_objective(inst, only0.nodes, only0.edges) == 1.0);

  PCSTSolution empty;
  CHECK(evaluate_objective(inst, empty.nodes, empty.edges) == 6.0);
}

TEST_CASE("objective rejects dangling edges", "[pcst]") {
  const FeatureGraph g({"a", "b"}, {{0, 1, 3.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {5.0, 1.0};
  PCSTSolution bad;
  bad.nodes = {0};
  bad.edges = {0};
  REQUIRE_THROWS_AS(evaluate_objective(inst, bad.nodes, bad.edges), InvalidInput);
}

TEST_CASE("objective applies prize and component weights", "[pcst]") {
  const FeatureGraph g({"a", "b", "c"}, {{0, 1, 1.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {2.0, 3.0, 4.0};
  inst.prize_scale = 0.5;
  inst.component_penalty = 10.0;
  PCSTSolution sol;
  sol.nodes = {0, 1};
  sol.edges = {0};
  // excluded prize 4 scaled by 0.5, one edge of cost 1, one component
  CHECK(evaluate_objective(inst, sol.nodes, sol.edges) == Catch::Approx(0.5 * 4.0 + 1.0 + 10.0));
}

TEST_CASE("star with prized leaves keeps the whole star", "[pcst]") {
  const FeatureGraph g({"center", "l1", "l2", "l3"},
                       {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {0.0, 10.0, 10.0, 10.0};

  const PCSTSolution sol = solve_pcst(inst);
  REQUIRE(sol.nodes == NodeSet{0, 1, 2, 3});
  CHECK(sol.objective_value == Catch::Approx(3.0));

  const PCSTSolution exact = brute_force_pcst(inst);
  CHECK(exact.objective_value == Catch::Approx(3.0));
}

TEST_CASE("expensive edge is dropped for the cheap prize", "[pcst]") {
  const FeatureGraph g({"a", "b"}, {{0, 1, 5.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {10.0, 0.1};

  const PCSTSolution sol = solve_pcst(inst);
  REQUIRE(sol.nodes == NodeSet{0});
  CHECK(sol.edges.empty());
  CHECK(sol.objective_value == Catch::Approx(0.1));
}

TEST_CASE("all-zero prizes yield the empty solution", "[pcst]") {
  const FeatureGraph g({"a", "b", "c"}, {{0, 1, 1.0}, {1, 2, 1.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {0.0, 0.0, 0.0};

  const PCSTSolution sol = solve_pcst(inst);
  CHECK(sol.nodes.empty());
  CHECK(sol.edges.empty());
  CHECK(sol.objective_value == 0.0);
}

TEST_CASE("triangle with heavy edges keeps one node", "[pcst]") {
  const FeatureGraph g({"a", "b", "c"}, {{0, 1, 10.0}, {1, 2, 10.0}, {0, 2, 10.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {1.0, 1.0, 1.0};

  const PCSTSolution sol = solve_pcst(inst);
  REQUIRE(sol.nodes.size() == 1);
  CHECK(sol.edges.empty());
  CHECK(sol.objective_value == Catch::Approx(2.0));

  const PCSTSolution exact = brute_force_pcst(inst);
  CHECK(exact.objective_value == Catch::Approx(2.0));
}

TEST_CASE("solutions are forests with one tree", "[pcst]") {
  Rng rng(42);
  for (int trial = 0; trial < 120; ++trial) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(9));
    const FeatureGraph g = random_graph(rng, n, 0.4);
    PCSTInstance inst;
    inst.graph = &g;
    inst.prizes.resize(n);
    for (auto& p : inst.prizes) p = rng.uniform(0.0, 10.0);

    const PCSTSolution sol = solve_pcst(inst);
    const std::size_t comps = component_count(g, sol);
    CHECK(comps <= 1);
    if (!sol.nodes.empty())
      CHECK(sol.edges.size() == sol.nodes.size() - comps);
    for (std::uint32_t e : sol.edges) {
      CHECK(node_set_contains(sol.nodes, g.edge(e).u));
      CHECK(node_set_contains(sol.nodes, g.edge(e).v));
    }
    CHECK(sol.objective_value == Catch::Approx(evaluate_objective(inst, sol.nodes, sol.edges)));
  }
}

TEST_CASE("objective stays within twice the exact optimum", "[pcst]") {
  Rng rng(1234);
  double worst_ratio = 1.0;
  double median_probe = 0.0;
  std::vector<double> ratios;
  for (int trial = 0; trial < 220; ++trial) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(9));
    const FeatureGraph g = random_graph(rng, n, 0.45);
    PCSTInstance inst;
    inst.graph = &g;
    inst.prizes.resize(n);
    for (auto& p : inst.prizes) p = rng.uniform(0.0, 10.0);

    const PCSTSolution approx = solve_pcst(inst);
    const PCSTSolution exact = brute_force_pcst(inst);
    REQUIRE(approx.objective_value >= exact.objective_value - 1e-9);
    const double denom = std::max(exact.objective_value, 1e-12);
    const double ratio = approx.objective_value / denom;
    ratios.push_back(ratio);
    worst_ratio = std::max(worst_ratio, ratio);
    CHECK(approx.objective_value <= 2.0 * exact.objective_value + 1e-9);
  }
  std::sort(ratios.begin(), ratios.end());
  median_probe = ratios[ratios.size() / 2];
  WARN("approximation ratios over " << ratios.size() << " instances: worst "
                                    << worst_ratio << ", median " << median_probe);
  CHECK(median_probe <= 1.05);
}

TEST_CASE("huge uniform prizes reduce to spanning tree weight", "[pcst]") {
  Rng rng(987);
  int built = 0;
  while (built < 60) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(9));
    const FeatureGraph g = random_graph(rng, n, 0.6);
    NodeSet all;
    for (NodeId v = 0; v < n; ++v) all.push_back(v);
    if (!is_connected_subgraph(g, all)) continue;
    ++built;

    double total_cost = 0.0;
    for (const GraphEdge& e : g.edges()) total_cost += e.cost;
    PCSTInstance inst;
    inst.graph = &g;
    inst.prizes.assign(n, 10.0 * total_cost + 10.0);

    const PCSTSolution sol = solve_pcst(inst);
    REQUIRE(sol.nodes == all);
    double edge_sum = 0.0;
    for (std::uint32_t e : sol.edges) edge_sum += g.edge(e).cost;
    CHECK(edge_sum == mst_weight(g));
  }
}

TEST_CASE("raising the prize scale grows solutions", "[pcst]") {
  const FeatureGraph g({"a", "b", "c", "d"},
                       {{0, 1, 2.0}, {1, 2, 2.0}, {2, 3, 2.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {1.0, 1.0, 1.0, 1.0};

  inst.prize_scale = 0.1;
  const std::size_t small = solve_pcst(inst).nodes.size();
  inst.prize_scale = 100.0;
  const std::size_t big = solve_pcst(inst).nodes.size();
  CHECK(small <= big);
  CHECK(big == 4);
}

TEST_CASE("edge cost override replaces graph costs", "[pcst]") {
  const FeatureGraph g({"a", "b"}, {{0, 1, 100.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {5.0, 5.0};
  inst.edge_costs = std::vector<double>{0.5};

  const PCSTSolution sol = solve_pcst(inst);
  REQUIRE(sol.nodes.size() == 2);
  CHECK(sol.objective_value == Catch::Approx(0.5));

  inst.edge_cost_scale = 40.0;
  const PCSTSolution scaled = solve_pcst(inst);
  CHECK(scaled.nodes.size() == 1);
}

TEST_CASE("instance validation flags bad shapes", "[pcst]") {
  const FeatureGraph g({"a", "b"}, {{0, 1, 1.0}});
  PCSTInstance inst;
  inst.graph = &g;
  inst.prizes = {1.0};
  REQUIRE_THROWS_AS(validate_instance(inst), InvalidInput);

  inst.prizes = {1.0, -2.0};
  REQUIRE_THROWS_AS(validate_instance(inst), InvalidInput);

  inst.prizes = {1.0, 1.0};
  inst.target_components = 2;
  REQUIRE_THROWS_AS(solve_pcst(inst), InvalidInput);
}
