#include "techgap/analytics.hpp"

#include <algorithm>
#include <future>
#include <queue>
#include <set>

#include "techgap/error.hpp"

namespace techgap {

namespace {

Date year_end(int year) { return make_date(year, 12, 31); }

bool contains_sorted(std::span<const NodeId> sorted, NodeId n) {
  return std::binary_search(sorted.begin(), sorted.end(), n);
}

double jaccard(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  const std::size_t uni = a.size() + b.size() - common.size();
  return uni == 0 ? 0.0 : static_cast<double>(common.size()) / static_cast<double>(uni);
}

}  // namespace

TemporalCommunityIndex TemporalCommunityIndex::build(const GraphStore& graph, EdgeKindMask mask,
                                                     std::optional<int> last_year) {
  TemporalCommunityIndex index;
  index.mask_ = mask;
  index.node_count_ = graph.node_count();

  std::optional<int> first;
  std::optional<int> last;
  for (const auto& e : graph.edges()) {
    if (!mask.contains(e.kind)) continue;
    if (e.timestamp == Date{}) {
      throw Error(ErrorCode::UnstampedEdge, "edge " + graph.node(e.src).entity_id + " -> " +
                                                graph.node(e.dst).entity_id + " has no timestamp");
    }
    const int y = year_of(e.timestamp);
    if (!first || y < *first) first = y;
    if (!last || y > *last) last = y;
  }
  if (!first) return index;
  if (last_year) {
    if (*last_year < *first) {
      throw Error(ErrorCode::InvalidArgument, "last bucket year precedes every edge");
    }
    last = *last_year;
  }

  std::vector<std::future<Bucket>> pending;
  for (int y = *first; y <= *last; ++y) {
    pending.push_back(std::async(std::launch::async, [&graph, mask, y] {
      Bucket b;
      b.year = y;
      b.graph = graph.projection(mask, year_end(y));
      b.trussness = truss_decomposition(b.graph);
      return b;
    }));
  }
  for (auto& p : pending) index.buckets_.push_back(p.get());
  return index;
}

std::vector<int> TemporalCommunityIndex::years() const {
  std::vector<int> out;
  for (const auto& b : buckets_) out.push_back(b.year);
  return out;
}

unsigned TemporalCommunityIndex::trussness(std::size_t bucket, Edge edge) const {
  const auto& t = buckets_.at(bucket).trussness;
  auto it = t.find(edge);
  return it == t.end() ? 0 : it->second;
}

TemporalCommunityIndex build_temporal_index(const ViewSnapshot& snapshot, EdgeKindMask mask) {
  std::optional<int> last;
  if (snapshot.as_of() != Date{}) last = year_of(snapshot.as_of());
  if (auto range = snapshot.graph().year_range(); range && last && *last < range->first) {
    last.reset();
  }
  return TemporalCommunityIndex::build(snapshot.graph(), mask, last);
}

std::vector<DensityPoint> density_series(const TemporalCommunityIndex& index,
                                         std::span<const NodeId> region) {
  std::vector<NodeId> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<DensityPoint> out;
  for (const auto& b : index.buckets()) {
    DensityPoint p;
    p.year = b.year;
    for (NodeId n : sorted) {
      if (n >= b.graph.node_count()) throw Error(ErrorCode::UnknownNode, "node outside the index");
      std::size_t induced = 0;
      for (NodeId m : b.graph.neighbors(n)) {
        if (contains_sorted(sorted, m)) ++induced;
      }
      if (induced > 0) ++p.nodes;
      p.edges += induced;
    }
    p.edges /= 2;
    p.density = edge_density(p.nodes, p.edges);
    out.push_back(p);
  }
  return out;
}

bool densifies(std::span<const DensityPoint> series, unsigned history) {
  if (history == 0 || series.empty()) return false;
  const std::size_t n = std::min<std::size_t>(history, series.size());
  auto window = series.subspan(series.size() - n);
  bool strict = false;
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (window[i].density < window[i - 1].density) return false;
    if (window[i].density > window[i - 1].density) strict = true;
  }
  return strict;
}

nlohmann::json to_json(const RoiParams& params) {
  return {{"min_nodes", params.min_nodes},
          {"min_clust", params.min_clust},
          {"history", params.history},
          {"merge_jaccard", params.merge_jaccard},
          {"edge_kinds", to_json(params.mask)}};
}

RoiParams roi_params_from_json(const nlohmann::json& j) {
  RoiParams p;
  p.min_nodes = j.value("min_nodes", p.min_nodes);
  p.min_clust = j.value("min_clust", p.min_clust);
  p.history = j.value("history", p.history);
  p.merge_jaccard = j.value("merge_jaccard", p.merge_jaccard);
  if (j.contains("edge_kinds")) p.mask = edge_kind_mask_from_json(j["edge_kinds"]);
  return p;
}

std::string make_roi_id(const GraphStore& graph, std::span<const NodeId> nodes) {
  std::vector<std::string> ids;
  for (NodeId n : nodes) ids.push_back(graph.node(n).entity_id);
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (const auto& id : ids) joined += id + "\n";
  return "roi-" + sha256_hex(joined).substr(0, 12);
}

nlohmann::json to_json(const RoiSubgraph& roi, const GraphStore& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId n : roi.nodes) nodes.push_back(graph.node(n).entity_id);
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i : roi.edges) {
    const auto& e = graph.edges()[i];
    edges.push_back({{"src", graph.node(e.src).entity_id},
                     {"dst", graph.node(e.dst).entity_id},
                     {"kind", std::string(to_string(e.kind))},
                     {"timestamp", format_date(e.timestamp)},
                     {"weight", e.weight},
                     {"origin", e.origin}});
  }
  nlohmann::json series = nlohmann::json::array();
  for (const auto& p : roi.density_series) {
    series.push_back({{"year", p.year}, {"nodes", p.nodes}, {"edges", p.edges}, {"density", p.density}});
  }
  return {{"roi_id", roi.roi_id},
          {"nodes", nodes},
          {"edges", edges},
          {"density_series", series},
          {"params", to_json(roi.params)},
          {"seeds", roi.seeds},
          {"average_clustering", roi.average_clustering}};
}

RoiSubgraph roi_from_json(const nlohmann::json& j, const GraphStore& graph) {
  RoiSubgraph roi;
  roi.roi_id = j.at("roi_id").get<std::string>();
  for (const auto& id : j.at("nodes")) {
    auto n = graph.find(id.get<std::string>());
    if (!n) throw Error(ErrorCode::UnknownNode, "ROI node " + id.dump() + " is not in the snapshot");
    roi.nodes.push_back(*n);
  }
  std::sort(roi.nodes.begin(), roi.nodes.end());
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    const auto& e = graph.edges()[i];
    if (contains_sorted(roi.nodes, e.src) && contains_sorted(roi.nodes, e.dst)) roi.edges.push_back(i);
  }
  for (const auto& p : j.at("density_series")) {
    roi.density_series.push_back({p.at("year").get<int>(), p.at("nodes").get<std::size_t>(),
                                  p.at("edges").get<std::size_t>(), p.at("density").get<double>()});
  }
  roi.params = roi_params_from_json(j.at("params"));
  roi.seeds = j.value("seeds", std::vector<std::string>{});
  roi.average_clustering = j.value("average_clustering", 0.0);
  // Edges are re-derived from the graph; keep only the kinds the ROI used.
  std::erase_if(roi.edges, [&](std::size_t i) { return !roi.params.mask.contains(graph.edges()[i].kind); });
  return roi;
}

std::vector<NodeId> seed_region(const TemporalCommunityIndex& index, NodeId seed) {
  if (index.empty()) return {};
  const auto& latest = index.latest();
  if (seed >= latest.graph.node_count()) throw Error(ErrorCode::UnknownNode, "seed outside the graph");
  unsigned best = 0;
  for (NodeId m : latest.graph.neighbors(seed)) {
    best = std::max(best, index.trussness(index.buckets().size() - 1, make_edge(seed, m)));
  }
  if (best == 0) return {};

  std::set<NodeId> community{seed};
  std::queue<NodeId> frontier;
  frontier.push(seed);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId w : latest.graph.neighbors(u)) {
      if (community.count(w)) continue;
      if (index.trussness(index.buckets().size() - 1, make_edge(u, w)) < best) continue;
      community.insert(w);
      frontier.push(w);
    }
  }
  std::set<NodeId> closed = community;
  for (NodeId u : community) {
    for (NodeId w : latest.graph.neighbors(u)) closed.insert(w);
  }
  return {closed.begin(), closed.end()};
}

bool passes_gates(const TemporalCommunityIndex& index, std::span<const NodeId> region,
                  const RoiParams& params) {
  if (index.empty() || region.size() < params.min_nodes) return false;
  const UndirectedGraph induced = index.latest().graph.induced(region);
  if (average_clustering(induced, region) < params.min_clust) return false;
  return densifies(density_series(index, region), params.history);
}

std::vector<RoiSubgraph> detect_densifying_regions(const GraphStore& graph,
                                                   const TemporalCommunityIndex& index,
                                                   std::span<const NodeId> seeds,
                                                   const RoiParams& params) {
  struct Candidate {
    std::vector<NodeId> nodes;
    std::set<std::string> seeds;
    double final_density = 0.0;
    std::string id;
  };
  auto finish = [&](Candidate& c) {
    auto series = density_series(index, c.nodes);
    c.final_density = series.empty() ? 0.0 : series.back().density;
    c.id = make_roi_id(graph, c.nodes);
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.final_density != b.final_density) return a.final_density > b.final_density;
    return a.id < b.id;
  };

  std::vector<NodeId> unique_seeds(seeds.begin(), seeds.end());
  std::sort(unique_seeds.begin(), unique_seeds.end());
  unique_seeds.erase(std::unique(unique_seeds.begin(), unique_seeds.end()), unique_seeds.end());
  for (NodeId s : unique_seeds) {
    if (s >= graph.node_count()) throw Error(ErrorCode::UnknownNode, "seed node id out of range");
  }

  // One candidate per distinct region; seeds sharing a region are pooled.
  std::map<std::vector<NodeId>, std::set<std::string>> regions;
  std::map<std::vector<NodeId>, bool> verdict;
  for (NodeId s : unique_seeds) {
    auto region = seed_region(index, s);
    if (region.empty()) continue;
    auto [it, fresh] = verdict.try_emplace(region, false);
    if (fresh) it->second = passes_gates(index, region, params);
    if (it->second) regions[region].insert(graph.node(s).entity_id);
  }

  std::vector<Candidate> passing;
  for (auto& [nodes, seed_ids] : regions) {
    Candidate c{nodes, seed_ids, 0.0, {}};
    finish(c);
    passing.push_back(std::move(c));
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < passing.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < passing.size() && !changed; ++j) {
        if (jaccard(passing[i].nodes, passing[j].nodes) <= params.merge_jaccard) continue;
        Candidate merged;
        std::set_union(passing[i].nodes.begin(), passing[i].nodes.end(), passing[j].nodes.begin(),
                       passing[j].nodes.end(), std::back_inserter(merged.nodes));
        if (passes_gates(index, merged.nodes, params)) {
          merged.seeds = passing[i].seeds;
          merged.seeds.insert(passing[j].seeds.begin(), passing[j].seeds.end());
          finish(merged);
          passing[i] = std::move(merged);
        } else if (better(passing[j], passing[i])) {
          passing[i] = std::move(passing[j]);
        }
        passing.erase(passing.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
      }
    }
  }
  std::sort(passing.begin(), passing.end(), better);

  const Date last_day = index.empty() ? Date{} : year_end(index.latest().year);
  std::vector<RoiSubgraph> out;
  for (auto& c : passing) {
    RoiSubgraph roi;
    roi.roi_id = c.id;
    roi.nodes = c.nodes;
    for (std::size_t i = 0; i < graph.edges().size(); ++i) {
      const auto& e = graph.edges()[i];
      if (!params.mask.contains(e.kind) || e.timestamp > last_day) continue;
      if (contains_sorted(roi.nodes, e.src) && contains_sorted(roi.nodes, e.dst)) roi.edges.push_back(i);
    }
    roi.seeds.assign(c.seeds.begin(), c.seeds.end());
    roi.params = params;
    roi.density_series = density_series(index, roi.nodes);
    roi.average_clustering = average_clustering(index.latest().graph.induced(roi.nodes), roi.nodes);
    out.push_back(std::move(roi));
  }
  return out;
}

}  // namespace techgap
