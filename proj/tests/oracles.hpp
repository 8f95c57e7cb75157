#pragma once

// Brute-force reference implementations. Each one works on plain adjacency
// data and deliberately avoids the library's indices, so agreement with the
// library is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Adjacency = std::vector<std::set<int>>;

struct Dag {
  int n = 0;
  // (parent, child, relation index)
  std::vector<std::tuple<int, int, int>> edges;
};

// Parents always have a smaller index, so the result is acyclic. Some nodes
// receive several parents, which makes join nodes common.
inline Dag random_dag(std::mt19937_64& rng, int max_nodes, int relations = 3) {
  std::uniform_int_distribution<int> size(2, max_nodes);
  Dag dag;
  dag.n = size(rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> rel(0, relations - 1);
  std::set<std::tuple<int, int, int>> seen;
  for (int child = 1; child < dag.n; ++child) {
    if (coin(rng) < 0.08) continue;  // extra root
    std::uniform_int_distribution<int> pick(0, child - 1);
    const int parents = coin(rng) < 0.3 ? 2 + static_cast<int>(coin(rng) * 2) : 1;
    bool tree_parent = false;  // relation 2 (subpropertyOf) keeps one parent per node
    for (int p = 0; p < parents; ++p) {
      int r = rel(rng);
      if (r == 2 && tree_parent) r = static_cast<int>(rng() % 2);
      if (r == 2) tree_parent = true;
      auto e = std::make_tuple(pick(rng), child, r);
      if (seen.insert(e).second) dag.edges.push_back(e);
    }
  }
  return dag;
}

// Depth-bounded BFS downward over edges whose relation is in `relations`.
// depth < 0 means unbounded.
inline std::set<int> bfs_closure(const Dag& dag, const std::vector<int>& seeds,
                                 const std::set<int>& relations, int depth) {
  std::vector<std::vector<int>> down(dag.n);
  for (auto [p, c, r] : dag.edges) {
    if (relations.count(r)) down[p].push_back(c);
  }
  std::vector<int> dist(dag.n, -1);
  std::deque<int> queue;
  for (int s : seeds) {
    if (dist[s] < 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (depth >= 0 && dist[cur] == depth) continue;
    for (int c : down[cur]) {
      if (dist[c] < 0) {
        dist[c] = dist[cur] + 1;
        queue.push_back(c);
      }
    }
  }
  std::set<int> out;
  for (int i = 0; i < dag.n; ++i) {
    if (dist[i] >= 0) out.insert(i);
  }
  return out;
}

inline std::set<int> closure_difference(const Dag& dag, const std::vector<int>& pos,
                                        const std::vector<int>& neg, const std::set<int>& relations,
                                        int max_depth, int neg_depth) {
  std::set<int> out = bfs_closure(dag, pos, relations, max_depth);
  if (!neg.empty()) {
    for (int c : bfs_closure(dag, neg, relations, neg_depth)) out.erase(c);
  }
  return out;
}

// Recursive DFS over one relation; reflexive.
inline bool dfs_reachable(const Dag& dag, int from, int to, int relation) {
  std::vector<std::vector<int>> down(dag.n);
  for (auto [p, c, r] : dag.edges) {
    if (r == relation) down[p].push_back(c);
  }
  std::vector<char> seen(dag.n, 0);
  auto visit = [&](auto&& self, int node) -> bool {
    if (node == to) return true;
    seen[node] = 1;
    for (int c : down[node]) {
      if (!seen[c] && self(self, c)) return true;
    }
    return false;
  };
  return visit(visit, from);
}

inline Adjacency random_graph(std::mt19937_64& rng, int max_nodes, double min_p = 0.15,
                              double max_p = 0.75) {
  std::uniform_int_distribution<int> size(1, max_nodes);
  std::uniform_real_distribution<double> density(min_p, max_p);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int n = size(rng);
  const double p = density(rng);
  Adjacency adj(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng) < p) {
        adj[u].insert(v);
        adj[v].insert(u);
      }
    }
  }
  return adj;
}

inline std::vector<std::pair<int, int>> edge_list(const Adjacency& adj) {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
    for (int v : adj[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

// Triangles through `node` by checking every neighbor pair.
inline double clustering_by_triangles(const Adjacency& adj, int node) {
  std::vector<int> nb(adj[node].begin(), adj[node].end());
  const std::size_t d = nb.size();
  if (d < 2) return 0.0;
  std::size_t triangles = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (adj[nb[i]].count(nb[j])) ++triangles;
    }
  }
  return 2.0 * static_cast<double>(triangles) / static_cast<double>(d * (d - 1));
}

inline std::size_t triangle_count(const Adjacency& adj) {
  std::size_t t = 0;
  const int n = static_cast<int>(adj.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!adj[a].count(b)) continue;
      for (int c = b + 1; c < n; ++c) {
        if (adj[a].count(c) && adj[b].count(c)) ++t;
      }
    }
  }
  return t;
}

// Repeatedly deletes any edge supported by fewer than k-2 triangles in the
// remaining graph until nothing changes.
inline std::set<std::pair<int, int>> peel_truss(const Adjacency& adj, unsigned k) {
  std::set<std::pair<int, int>> alive;
  for (auto e : edge_list(adj)) alive.insert(e);
  auto has = [&](int a, int b) { return alive.count({std::min(a, b), std::max(a, b)}) > 0; };
  const int n = static_cast<int>(adj.size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end();) {
      auto [u, v] = *it;
      unsigned support = 0;
      for (int w = 0; w < n; ++w) {
        if (w != u && w != v && has(u, w) && has(v, w)) ++support;
      }
      if (k >= 2 && support + 2 < k) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return alive;
}

// Largest k whose peeled truss still contains the edge.
inline std::map<std::pair<int, int>, unsigned> peel_trussness(const Adjacency& adj) {
  std::map<std::pair<int, int>, unsigned> out;
  for (auto e : edge_list(adj)) out[e] = 2;
  for (unsigned k = 3;; ++k) {
    auto t = peel_truss(adj, k);
    if (t.empty()) break;
    for (auto e : t) out[e] = k;
  }
  return out;
}

inline bool subset_is_quasi_clique(const Adjacency& adj, const std::vector<int>& s, double gamma) {
  if (s.empty()) return false;
  const double need = std::ceil(gamma * static_cast<double>(s.size() - 1) - 1e-9);
  for (int u : s) {
    std::size_t d = 0;
    for (int v : s) {
      if (u != v && adj[u].count(v)) ++d;
    }
    if (static_cast<double>(d) < need) return false;
  }
  return true;
}

// All 2^n subsets; keeps the quasi-cliques of at least `min_size` nodes that
// no other kept subset strictly contains.
inline std::set<std::vector<int>> subset_quasi_cliques(const Adjacency& adj, double gamma,
                                                       std::size_t min_size) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::uint32_t> hits;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) < min_size) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1u) s.push_back(i);
    }
    if (subset_is_quasi_clique(adj, s, gamma)) hits.push_back(mask);
  }
  std::set<std::vector<int>> out;
  for (std::uint32_t m : hits) {
    bool dominated = false;
    for (std::uint32_t o : hits) {
      if (o != m && (o & m) == m) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i) {
      if (m >> i & 1u) s.push_back(i);
    }
    out.insert(s);
  }
  return out;
}

// Nodes within `radius` hops of `me`, including `me`.
inline std::set<int> bfs_ego(const Adjacency& adj, int me, unsigned radius) {
  std::map<int, unsigned> dist{{me, 0}};
  std::deque<int> queue{me};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (dist[cur] == radius) continue;
    for (int n : adj[cur]) {
      if (!dist.count(n)) {
        dist[n] = dist[cur] + 1;
        queue.push_back(n);
      }
    }
  }
  std::set<int> out;
  for (auto [node, d] : dist) out.insert(node);
  return out;
}

}  // namespace oracle
