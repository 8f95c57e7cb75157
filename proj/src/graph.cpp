#include "techgap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>

#include "techgap/error.hpp"

namespace techgap {

UndirectedGraph::UndirectedGraph(std::size_t node_count, std::span<const Edge> edges)
    : adjacency_(node_count) {
  for (const Edge& e : edges) add_edge(e.u, e.v);
}

void UndirectedGraph::add_edge(NodeId a, NodeId b) {
  if (a == b) return;
  if (a >= adjacency_.size() || b >= adjacency_.size()) {
    throw Error(ErrorCode::UnknownNode, "edge endpoint outside the graph");
  }
  auto& na = adjacency_[a];
  auto it = std::lower_bound(na.begin(), na.end(), b);
  if (it != na.end() && *it == b) return;
  na.insert(it, b);
  auto& nb = adjacency_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++edge_count_;
}

bool UndirectedGraph::has_edge(NodeId a, NodeId b) const {
  if (a >= adjacency_.size() || b >= adjacency_.size()) return false;
  const auto& na = adjacency_[a];
  return std::binary_search(na.begin(), na.end(), b);
}

std::vector<Edge> UndirectedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

UndirectedGraph UndirectedGraph::induced(std::span<const NodeId> nodes) const {
  std::vector<char> keep(adjacency_.size(), 0);
  for (NodeId n : nodes) keep.at(n) = 1;
  UndirectedGraph out(adjacency_.size());
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    if (!keep[u]) continue;
    for (NodeId v : adjacency_[u]) {
      if (u < v && keep[v]) {
        out.adjacency_[u].push_back(v);
        out.adjacency_[v].push_back(u);
        ++out.edge_count_;
      }
    }
  }
  for (auto& adj : out.adjacency_) std::sort(adj.begin(), adj.end());
  return out;
}

std::size_t common_neighbor_count(const UndirectedGraph& graph, NodeId a, NodeId b) {
  auto na = graph.neighbors(a);
  auto nb = graph.neighbors(b);
  std::size_t count = 0;
  auto i = na.begin();
  auto j = nb.begin();
  while (i != na.end() && j != nb.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double clustering_coefficient(const UndirectedGraph& graph, NodeId node) {
  if (node >= graph.node_count()) throw Error(ErrorCode::UnknownNode, "unknown node");
  auto nbrs = graph.neighbors(node);
  const std::size_t deg = nbrs.size();
  if (deg < 2) return 0.0;
  std::size_t links = 0;
  for (NodeId n : nbrs) links += common_neighbor_count(graph, node, n);
  // Each triangle through `node` is seen from both of its other corners.
  return static_cast<double>(links) / static_cast<double>(deg * (deg - 1));
}

double average_clustering(const UndirectedGraph& graph, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (NodeId n : nodes) sum += clustering_coefficient(graph, n);
  return sum / static_cast<double>(nodes.size());
}

double edge_density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  return 2.0 * static_cast<double>(edges) /
         (static_cast<double>(nodes) * static_cast<double>(nodes - 1));
}

std::map<Edge, unsigned> truss_decomposition(const UndirectedGraph& graph) {
  const std::vector<Edge> edges = graph.edges();
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(edges.size() * 2);
  auto key = [](NodeId a, NodeId b) {
    Edge e = make_edge(a, b);
    return (static_cast<std::uint64_t>(e.u) << 32) | e.v;
  };
  for (std::size_t i = 0; i < edges.size(); ++i) index.emplace(key(edges[i].u, edges[i].v), i);

  std::vector<std::size_t> support(edges.size());
  std::vector<char> alive(edges.size(), 1);
  std::set<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    support[i] = common_neighbor_count(graph, edges[i].u, edges[i].v);
    queue.emplace(support[i], i);
  }

  std::map<Edge, unsigned> truss;
  unsigned k = 2;
  while (!queue.empty()) {
    auto [sup, e] = *queue.begin();
    queue.erase(queue.begin());
    k = std::max<unsigned>(k, static_cast<unsigned>(sup) + 2);
    truss.emplace(edges[e], k);
    alive[e] = 0;
    const NodeId u = edges[e].u;
    const NodeId v = edges[e].v;
    auto nu = graph.neighbors(u);
    auto nv = graph.neighbors(v);
    std::vector<NodeId> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    for (NodeId w : common) {
      std::size_t uw = index.at(key(u, w));
      std::size_t vw = index.at(key(v, w));
      if (!alive[uw] || !alive[vw]) continue;
      for (std::size_t other : {uw, vw}) {
        queue.erase({support[other], other});
        if (support[other] > 0) --support[other];
        queue.emplace(support[other], other);
      }
    }
  }
  return truss;
}

std::vector<Edge> k_truss(const UndirectedGraph& graph, unsigned k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-truss requires k >= 2");
  std::vector<Edge> out;
  for (const auto& [edge, t] : truss_decomposition(graph)) {
    if (t >= k) out.push_back(edge);
  }
  return out;
}

std::size_t quasi_clique_degree_bound(std::size_t size, double gamma) {
  if (size <= 1) return 0;
  // The epsilon keeps products like 0.8 * 5 from rounding up to 5.
  return static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(size - 1) - 1e-9));
}

bool is_quasi_clique(const UndirectedGraph& graph, std::span<const NodeId> nodes, double gamma) {
  const std::size_t need = quasi_clique_degree_bound(nodes.size(), gamma);
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  for (NodeId n : sorted) {
    std::size_t deg = 0;
    for (NodeId m : graph.neighbors(n)) {
      if (std::binary_search(sorted.begin(), sorted.end(), m)) ++deg;
    }
    if (deg < need) return false;
  }
  return true;
}

namespace {

class QuasiCliqueSearch {
 public:
  QuasiCliqueSearch(const UndirectedGraph& graph, double gamma, std::size_t min_size,
                    std::size_t max_branches)
      : graph_(graph), gamma_(gamma), min_size_(std::max<std::size_t>(min_size, 1)),
        max_branches_(max_branches), in_set_(graph.node_count(), 0) {
    if (gamma_ >= 0.5) {
      two_hop_.assign(graph.node_count(), std::vector<char>(graph.node_count(), 0));
      for (NodeId u = 0; u < graph.node_count(); ++u) {
        two_hop_[u][u] = 1;
        for (NodeId v : graph.neighbors(u)) {
          two_hop_[u][v] = 1;
          for (NodeId w : graph.neighbors(v)) two_hop_[u][w] = 1;
        }
      }
    }
  }

  std::vector<std::vector<NodeId>> run() {
    std::vector<NodeId> cand;
    const std::size_t floor = quasi_clique_degree_bound(min_size_, gamma_);
    for (NodeId v = 0; v < graph_.node_count(); ++v) {
      if (graph_.degree(v) >= floor) cand.push_back(v);
    }
    std::vector<NodeId> members;
    search(members, cand);

    std::sort(found_.begin(), found_.end(),
              [](const auto& a, const auto& b) { return a.size() != b.size() ? a.size() > b.size() : a < b; });
    found_.erase(std::unique(found_.begin(), found_.end()), found_.end());
    std::vector<std::vector<NodeId>> maximal;
    for (const auto& s : found_) {
      bool dominated = std::any_of(maximal.begin(), maximal.end(), [&](const auto& m) {
        return m.size() > s.size() && std::includes(m.begin(), m.end(), s.begin(), s.end());
      });
      if (!dominated) maximal.push_back(s);
    }
    std::sort(maximal.begin(), maximal.end());
    return maximal;
  }

 private:
  std::size_t degree_within(NodeId v) const {
    std::size_t deg = 0;
    for (NodeId n : graph_.neighbors(v)) deg += in_set_[n];
    return deg;
  }

  void mark(std::span<const NodeId> nodes, char value) {
    for (NodeId n : nodes) in_set_[n] = value;
  }

  bool valid(std::span<const NodeId> nodes) {
    if (nodes.size() < min_size_) return false;
    mark(nodes, 1);
    const std::size_t need = quasi_clique_degree_bound(nodes.size(), gamma_);
    bool ok = std::all_of(nodes.begin(), nodes.end(), [&](NodeId v) { return degree_within(v) >= need; });
    mark(nodes, 0);
    return ok;
  }

  // Shrinks `cand` in place; false when no valid superset of `members` can
  // be built from it.
  bool prune(const std::vector<NodeId>& members, std::vector<NodeId>& cand) {
    for (;;) {
      if (members.size() + cand.size() < min_size_) return false;
      mark(members, 1);
      mark(cand, 1);
      const std::size_t member_need =
          quasi_clique_degree_bound(std::max(members.size(), min_size_), gamma_);
      const std::size_t cand_need =
          quasi_clique_degree_bound(std::max(members.size() + 1, min_size_), gamma_);
      bool members_ok = std::all_of(members.begin(), members.end(),
                                    [&](NodeId x) { return degree_within(x) >= member_need; });
      std::vector<NodeId> kept;
      kept.reserve(cand.size());
      for (NodeId v : cand) {
        bool ok = degree_within(v) >= cand_need;
        if (ok && !two_hop_.empty()) {
          ok = std::all_of(members.begin(), members.end(), [&](NodeId x) { return two_hop_[x][v]; });
        }
        if (ok) kept.push_back(v);
      }
      mark(members, 0);
      mark(cand, 0);
      if (!members_ok) return false;
      if (kept.size() == cand.size()) return true;
      cand.swap(kept);
    }
  }

  void search(std::vector<NodeId>& members, std::vector<NodeId> cand) {
    if (max_branches_ != 0 && ++branches_ > max_branches_) {
      throw Error(ErrorCode::SearchBudgetExceeded,
                  "quasi-clique search exceeded " + std::to_string(max_branches_) +
                      " branches; raise gamma or min_size, or the budget");
    }
    if (!prune(members, cand)) {
      if (valid(members)) found_.push_back(members);
      return;
    }
    if (valid(members)) found_.push_back(members);
    if (cand.empty()) return;

    std::vector<NodeId> all = members;
    all.insert(all.end(), cand.begin(), cand.end());
    std::sort(all.begin(), all.end());
    if (valid(all)) {
      found_.push_back(std::move(all));
      return;
    }
    for (std::size_t i = 0; i < cand.size(); ++i) {
      members.push_back(cand[i]);
      search(members, std::vector<NodeId>(cand.begin() + static_cast<std::ptrdiff_t>(i) + 1, cand.end()));
      members.pop_back();
    }
  }

  const UndirectedGraph& graph_;
  double gamma_;
  std::size_t min_size_;
  std::size_t max_branches_;
  std::size_t branches_ = 0;
  std::vector<char> in_set_;
  std::vector<std::vector<char>> two_hop_;
  std::vector<std::vector<NodeId>> found_;
};

}  // namespace

std::vector<std::vector<NodeId>> quasi_cliques(const UndirectedGraph& graph, double gamma,
                                               std::size_t min_size, std::size_t max_branches) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  }
  return QuasiCliqueSearch(graph, gamma, min_size, max_branches).run();
}

std::vector<NodeId> ego_network(const UndirectedGraph& graph, NodeId me, unsigned radius) {
  if (me >= graph.node_count()) throw Error(ErrorCode::UnknownOrganization, "unknown ego node");
  std::vector<int> dist(graph.node_count(), -1);
  std::deque<NodeId> queue{me};
  dist[me] = 0;
  std::vector<NodeId> out;
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    out.push_back(cur);
    if (static_cast<unsigned>(dist[cur]) == radius) continue;
    for (NodeId n : graph.neighbors(cur)) {
      if (dist[n] < 0) {
        dist[n] = dist[cur] + 1;
        queue.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace techgap
