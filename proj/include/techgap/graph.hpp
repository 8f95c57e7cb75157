#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace techgap {

using NodeId = std::uint32_t;

/// Undirected edge with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  auto operator<=>(const Edge&) const = default;
};

inline Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Simple undirected graph with sorted adjacency lists. Self-loops and
/// repeated edges are ignored on insertion.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t node_count) : adjacency_(node_count) {}
  UndirectedGraph(std::size_t node_count, std::span<const Edge> edges);

  void add_edge(NodeId a, NodeId b);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const NodeId> neighbors(NodeId node) const { return adjacency_.at(node); }
  std::size_t degree(NodeId node) const { return adjacency_.at(node).size(); }
  bool has_edge(NodeId a, NodeId b) const;

  /// All edges in ascending order.
  std::vector<Edge> edges() const;

  /// Same node id space, only edges with both ends in `nodes`.
  UndirectedGraph induced(std::span<const NodeId> nodes) const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

std::size_t common_neighbor_count(const UndirectedGraph& graph, NodeId a, NodeId b);

/// 2·triangles / (deg·(deg−1)); zero when deg < 2.
double clustering_coefficient(const UndirectedGraph& graph, NodeId node);

/// Mean clustering coefficient over `nodes` (0 for an empty set).
double average_clustering(const UndirectedGraph& graph, std::span<const NodeId> nodes);

/// Edge density 2|E| / (|V|(|V|−1)); zero below two nodes.
double edge_density(std::size_t nodes, std::size_t edges);

/// Maximum k for which each edge belongs to the k-truss (always ≥ 2).
std::map<Edge, unsigned> truss_decomposition(const UndirectedGraph& graph);

/// Edges of the maximal subgraph where every edge closes ≥ k−2 triangles.
std::vector<Edge> k_truss(const UndirectedGraph& graph, unsigned k);

/// Minimum in-set degree for a γ-quasi-clique of `size` nodes:
/// ⌈γ·(size−1)⌉.
std::size_t quasi_clique_degree_bound(std::size_t size, double gamma);

bool is_quasi_clique(const UndirectedGraph& graph, std::span<const NodeId> nodes, double gamma);

/// All maximal γ-quasi-cliques with at least `min_size` nodes, each sorted,
/// returned in lexicographic order. Branch and bound over a set-enumeration
/// tree with degree and (γ ≥ ½) two-hop pruning plus look-ahead. A nonzero
/// `max_branches` bounds the visited tree nodes; exceeding it throws
/// SearchBudgetExceeded rather than returning a partial answer.
std::vector<std::vector<NodeId>> quasi_cliques(const UndirectedGraph& graph, double gamma,
                                               std::size_t min_size, std::size_t max_branches = 0);

/// `me` plus every node within `radius` hops, sorted.
std::vector<NodeId> ego_network(const UndirectedGraph& graph, NodeId me, unsigned radius);

}  // namespace techgap
