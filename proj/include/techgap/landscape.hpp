#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "techgap/analytics.hpp"
#include "techgap/kg_store.hpp"
#include "techgap/ontology.hpp"

namespace techgap {

inline constexpr std::size_t kMetricCount = 4;
inline constexpr std::array<std::string_view, kMetricCount> kMetricNames{
    "patent_count", "publication_count", "award_total", "news_mentions"};

using KpiMetrics = std::array<double, kMetricCount>;

struct LandscapeParams {
  RoiParams roi;
  /// Ontology levels added above each ROI technology in T.
  unsigned ontology_levels = 2;

  bool operator==(const LandscapeParams&) const = default;
};

nlohmann::json to_json(const LandscapeParams& params);
LandscapeParams landscape_params_from_json(const nlohmann::json& j);

/// One (org, interval, tech) row of the performance relation P.
struct PerformanceRow {
  std::string org;
  int interval = 0;
  std::string tech;
  KpiMetrics metrics{};

  bool operator==(const PerformanceRow&) const = default;
};

/// Ontological edges run parent → child; co-occurrence edges have from < to.
struct TechEdge {
  std::string from;
  std::string to;
  std::string kind;
  double weight = 1.0;

  bool operator==(const TechEdge&) const = default;
};

struct TechCorrelationGraph {
  std::vector<std::string> nodes;
  std::vector<TechEdge> edges;

  bool operator==(const TechCorrelationGraph&) const = default;
};

struct Evidence {
  std::string kind;  // jointPatent | coAuthorship | declaredPartnership
  std::string source;
  Date date{};
  std::optional<std::string> tech_context;

  auto operator<=>(const Evidence&) const = default;
};

struct PartnershipEdge {
  std::string a;  // a < b
  std::string b;
  std::vector<Evidence> evidence;

  bool operator==(const PartnershipEdge&) const = default;
};

struct OrgPartnershipGraph {
  std::vector<std::string> nodes;
  std::vector<PartnershipEdge> edges;

  bool operator==(const OrgPartnershipGraph&) const = default;
};

struct Provenance {
  ExpansionQuery query;
  /// Terms whose expansion bounds the query expansion; empty when unused.
  std::vector<std::string> context;
  LandscapeParams params;
  std::string snapshot_id;
};

nlohmann::json to_json(const Provenance& provenance);
Provenance provenance_from_json(const nlohmann::json& j);

/// L = (P, T, C) plus the ROIs it was built from.
struct Landscape {
  std::string landscape_id;
  Provenance provenance;
  std::vector<std::string> expansion;
  /// Bucket years of the temporal index, oldest first.
  std::vector<int> intervals;
  std::vector<RoiSubgraph> rois;
  std::vector<PerformanceRow> performance;
  TechCorrelationGraph tech;
  OrgPartnershipGraph partnerships;

  /// Union of the ROI node sets: the materialized ROI graph G.
  std::vector<NodeId> roi_nodes() const;
  /// Landscape organizations (nodes of C), sorted.
  const std::vector<std::string>& organizations() const { return partnerships.nodes; }
};

/// Bundle layout: {landscape_id, provenance, expansion, intervals, roi_refs,
/// rois, P: {columns, rows}, T: {nodes, edges}, C: {nodes, edges}}.
nlohmann::json to_json(const Landscape& landscape, const GraphStore& graph);
Landscape landscape_from_json(const nlohmann::json& j, const GraphStore& graph);

/// Builds P, T and C around the ROIs. Organizations are those inside G or
/// adjacent to it that have at least one performance row.
Landscape construct_landscape(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                              std::vector<RoiSubgraph> rois, const std::set<std::string>& expansion,
                              Provenance provenance);

/// Expansion, densifying regions and landscape construction. When
/// `provenance.context` is nonempty the expansion is intersected with the
/// context expansion. Throws UnknownTerm, EmptyExpansion.
Landscape run_landscape(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                        const ExpansionQuery& query, const LandscapeParams& params,
                        const std::vector<std::string>& context = {});
Landscape run_landscape(const ViewSnapshot& snapshot, const ExpansionQuery& query,
                        const LandscapeParams& params);

struct CubeRow {
  std::optional<std::string> org;
  std::optional<int> interval;
  std::optional<std::string> tech;
  KpiMetrics metrics{};

  bool operator==(const CubeRow&) const = default;
};

/// Sum of every metric grouped by `dims` ⊆ {org, tech, interval}; the empty
/// set yields the grand total. Throws UnknownDimension.
std::vector<CubeRow> kpi_cube(const Landscape& landscape, const std::vector<std::string>& dims);
nlohmann::json to_json(const std::vector<CubeRow>& cube, const std::vector<std::string>& dims);

}  // namespace techgap
