#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "techgap/data_model.hpp"
#include "techgap/graph.hpp"
#include "techgap/kg_store.hpp"

namespace techgap {

/// Cumulative per-year truss decompositions of the undirected projection.
/// Bucket i holds every selected edge stamped in or before `years()[i]`.
class TemporalCommunityIndex {
 public:
  struct Bucket {
    int year = 0;
    UndirectedGraph graph;
    std::map<Edge, unsigned> trussness;
  };

  TemporalCommunityIndex() = default;

  /// Buckets run from the earliest edge year to `last_year` (default: the
  /// latest edge year). Throws UnstampedEdge for an edge at the epoch
  /// sentinel date, InvalidArgument when `last_year` precedes every edge.
  static TemporalCommunityIndex build(const GraphStore& graph, EdgeKindMask mask = {},
                                      std::optional<int> last_year = {});

  std::span<const Bucket> buckets() const { return buckets_; }
  bool empty() const { return buckets_.empty(); }
  const Bucket& latest() const { return buckets_.back(); }
  std::vector<int> years() const;
  EdgeKindMask mask() const { return mask_; }
  std::size_t node_count() const { return node_count_; }

  /// 0 when the edge is absent from the bucket.
  unsigned trussness(std::size_t bucket, Edge edge) const;

 private:
  std::vector<Bucket> buckets_;
  EdgeKindMask mask_;
  std::size_t node_count_ = 0;
};

/// Uses the snapshot's as-of year as the last bucket.
TemporalCommunityIndex build_temporal_index(const ViewSnapshot& snapshot, EdgeKindMask mask = {});

struct DensityPoint {
  int year = 0;
  /// Region nodes with at least one induced edge by the end of the bucket.
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double density = 0.0;

  bool operator==(const DensityPoint&) const = default;
};

/// One point per index bucket for the induced subgraph on `region`.
std::vector<DensityPoint> density_series(const TemporalCommunityIndex& index,
                                         std::span<const NodeId> region);

/// Trailing `history` points are non-decreasing in density with at least
/// one strict increase. Fewer points than `history` uses all of them.
bool densifies(std::span<const DensityPoint> series, unsigned history);

struct RoiParams {
  std::size_t min_nodes = 100;
  double min_clust = 0.7;
  unsigned history = 5;
  double merge_jaccard = 0.5;
  EdgeKindMask mask;

  bool operator==(const RoiParams&) const = default;
};

nlohmann::json to_json(const RoiParams& params);
RoiParams roi_params_from_json(const nlohmann::json& j);

struct RoiSubgraph {
  std::string roi_id;
  /// Sorted graph-node ids of the snapshot the region was detected in.
  std::vector<NodeId> nodes;
  /// Indices into the graph store's edge list, both ends inside `nodes`.
  std::vector<std::size_t> edges;
  std::vector<std::string> seeds;
  RoiParams params;
  std::vector<DensityPoint> density_series;
  double average_clustering = 0.0;
};

/// `{roi_id, nodes, edges, density_series, params, seeds, average_clustering}`
/// with entity ids resolved against `graph`.
nlohmann::json to_json(const RoiSubgraph& roi, const GraphStore& graph);
RoiSubgraph roi_from_json(const nlohmann::json& j, const GraphStore& graph);

/// Content id over the sorted member entity ids.
std::string make_roi_id(const GraphStore& graph, std::span<const NodeId> nodes);

/// Region of one seed: the connected component of edges whose trussness
/// reaches the seed's best trussness in the latest bucket, closed over one
/// hop. Empty when the seed has no edge.
std::vector<NodeId> seed_region(const TemporalCommunityIndex& index, NodeId seed);

/// Gate re-check from the index: size, average clustering on the latest
/// bucket and the densification window.
bool passes_gates(const TemporalCommunityIndex& index, std::span<const NodeId> region,
                  const RoiParams& params);

/// Densifying regions grown from the seeds, merged on Jaccard overlap and
/// sorted by final density (descending), then roi_id. Throws UnknownNode.
std::vector<RoiSubgraph> detect_densifying_regions(const GraphStore& graph,
                                                   const TemporalCommunityIndex& index,
                                                   std::span<const NodeId> seeds,
                                                   const RoiParams& params);

}  // namespace techgap
