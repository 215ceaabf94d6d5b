#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gslr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied inputs (files, flags, dimensions). The CLI
// maps these to exit code 1; anything else is an internal failure.
struct InvalidInput : Error {
  using Error::Error;
};

using NodeId = std::uint32_t;

// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<NodeId>;

inline NodeSet make_node_set(std::vector<NodeId> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return members;
}

inline bool node_set_contains(const NodeSet& s, NodeId v) {
  return std::binary_search(s.begin(), s.end(), v);
}

inline std::size_t intersection_size(const NodeSet& a, const NodeSet& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

struct GraphEdge {
  NodeId u;
  NodeId v;
  double cost;
};

// Undirected weighted graph over feature indices. Immutable once built;
// safe to share across threads.
class FeatureGraph {
 public:
  FeatureGraph(std::vector<std::string> node_names, std::vector<GraphEdge> edges)
      : names_(std::move(node_names)), edges_(std::move(edges)) {
    validate();
    adjacency_.assign(names_.size(), {});
    for (std::uint32_t e = 0; e < edges_.size(); ++e) {
      adjacency_[edges_[e].u].push_back(e);
      adjacency_[edges_[e].v].push_back(e);
    }
    for (std::uint32_t i = 0; i < names_.size(); ++i) index_by_name_.emplace(names_[i], i);
  }

  std::uint32_t node_count() const { return static_cast<std::uint32_t>(names_.size()); }
  const std::vector<std::string>& node_names() const { return names_; }
  const std::string& node_name(NodeId v) const { return names_.at(v); }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphEdge& edge(std::uint32_t e) const { return edges_.at(e); }
  std::uint32_t edge_count() const { return static_cast<std::uint32_t>(edges_.size()); }

  // Edge ids incident to v.
  const std::vector<std::uint32_t>& incident(NodeId v) const { return adjacency_.at(v); }

  std::optional<NodeId> find_node(std::string_view name) const {
    auto it = index_by_name_.find(std::string(name));
    if (it == index_by_name_.end()) return std::nullopt;
    return it->second;
  }

  NodeId other_end(std::uint32_t e, NodeId v) const {
    const GraphEdge& ed = edges_[e];
    return ed.u == v ? ed.v : ed.u;
  }

 private:
  void validate() const {
    const std::size_t d = names_.size();
    std::unordered_set<std::string> seen_names;
    for (const auto& n : names_) {
      if (!seen_names.insert(n).second)
        throw InvalidInput("duplicate node name: '" + n + "'");
    }
    std::unordered_set<std::uint64_t> seen_edges;
    for (const GraphEdge& e : edges_) {
      if (e.u >= d || e.v >= d)
        throw InvalidInput("edge endpoint out of range: (" + std::to_string(e.u) + ", " +
                           std::to_string(e.v) + ") with " + std::to_string(d) + " nodes");
      if (e.u == e.v)
        throw InvalidInput("self-loop on node '" + names_[e.u] + "'");
      if (!(e.cost >= 0.0) || !std::isfinite(e.cost))
        throw InvalidInput("edge cost must be finite and nonnegative, got " +
                           std::to_string(e.cost));
      const std::uint64_t key =
          (static_cast<std::uint64_t>(std::min(e.u, e.v)) << 32) | std::max(e.u, e.v);
      if (!seen_edges.insert(key).second)
        throw InvalidInput("duplicate undirected edge {" + names_[e.u] + ", " + names_[e.v] +
                           "}");
    }
  }

  std::vector<std::string> names_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::unordered_map<std::string, NodeId> index_by_name_;
};

enum class NamePolicy { by_name, by_index };

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  const char sep = line.find(',') != std::string::npos ? ',' : '\t';
  std::string field;
  std::istringstream ss(line);
  if (sep == '\t' && line.find('\t') == std::string::npos) {
    // whitespace-separated fallback
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  while (std::getline(ss, field, sep)) {
    // trim surrounding spaces
    std::size_t b = field.find_first_not_of(" \r");
    std::size_t e = field.find_last_not_of(" \r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("line " + std::to_string(line_no) + ": cannot parse " + what + " '" + s +
                       "'");
  return value;
}

}  // namespace detail

// Edge-list loader. One edge per line: node1, node2, cost; tab- or
// comma-separated; lines starting with '#' are skipped. With by_name the
// indices are assigned in order of first appearance; sidecar_names, when
// given, pre-registers nodes (so isolated nodes are representable).
inline FeatureGraph load_graph(std::istream& in, NamePolicy policy,
                               const std::vector<std::string>* sidecar_names = nullptr) {
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;
  auto intern = [&](const std::string& name) -> NodeId {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const NodeId id = static_cast<NodeId>(names.size());
    names.push_back(name);
    index.emplace(name, id);
    return id;
  };
  if (sidecar_names != nullptr) {
    for (const auto& n : *sidecar_names) {
      if (index.count(n)) throw InvalidInput("duplicate node name in sidecar: '" + n + "'");
      intern(n);
    }
  }

  std::vector<GraphEdge> edges;
  std::uint32_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 3)
      throw InvalidInput("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                         std::to_string(fields.size()));
    const double cost = detail::parse_double(fields[2], line_no, "edge cost");
    if (!(cost >= 0.0) || !std::isfinite(cost))
      throw InvalidInput("line " + std::to_string(line_no) + ": negative or non-finite cost " +
                         fields[2]);
    NodeId u, v;
    if (policy == NamePolicy::by_name) {
      u = intern(fields[0]);
      v = intern(fields[1]);
    } else {
      u = static_cast<NodeId>(detail::parse_double(fields[0], line_no, "node index"));
      v = static_cast<NodeId>(detail::parse_double(fields[1], line_no, "node index"));
      max_index = std::max({max_index, u, v});
    }
    if (u == v)
      throw InvalidInput("line " + std::to_string(line_no) + ": self-loop on '" + fields[0] +
                         "'");
    edges.push_back({u, v, cost});
  }
  if (policy == NamePolicy::by_index) {
    const std::uint32_t d =
        edges.empty() && sidecar_names == nullptr ? 0 : max_index + 1;
    const std::uint32_t total =
        std::max<std::uint32_t>(d, static_cast<std::uint32_t>(names.size()));
    for (std::uint32_t i = static_cast<std::uint32_t>(names.size()); i < total; ++i)
      names.push_back(std::to_string(i));
  }
  return FeatureGraph(std::move(names), std::move(edges));
}

inline void save_graph(const FeatureGraph& g, std::ostream& out) {
  out << "# node1\tnode2\tcost\n";
  char buf[32];
  for (const GraphEdge& e : g.edges()) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), e.cost);
    out << g.node_name(e.u) << '\t' << g.node_name(e.v) << '\t'
        << std::string_view(buf, static_cast<std::size_t>(p - buf)) << '\n';
  }
}

// True iff the subgraph induced by s is connected; a singleton counts as
// connected. The empty set is rejected rather than given a convention.
inline bool is_connected_subgraph(const FeatureGraph& g, const NodeSet& s) {
  if (s.empty()) throw InvalidInput("connectivity of the empty node set is undefined");
  for (NodeId v : s)
    if (v >= g.node_count())
      throw InvalidInput("node index " + std::to_string(v) + " out of range");
  std::vector<std::uint8_t> member(g.node_count(), 0);
  for (NodeId v : s) member[v] = 1;
  std::vector<NodeId> stack{s.front()};
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  seen[s.front()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (std::uint32_t e : g.incident(v)) {
      const NodeId w = g.other_end(e, v);
      if (member[w] && !seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == s.size();
}

// rows x cols lattice with 4-neighbor edges of uniform cost.
inline FeatureGraph make_grid_graph(int rows, int cols, double cost = 1.0) {
  if (rows < 1 || cols < 1) throw InvalidInput("grid dimensions must be positive");
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) names.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
  std::vector<GraphEdge> edges;
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), cost});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), cost});
    }
  }
  return FeatureGraph(std::move(names), std::move(edges));
}

}  // namespace gslr
