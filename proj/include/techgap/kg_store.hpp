#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "techgap/data_model.hpp"
#include "techgap/graph.hpp"
#include "techgap/ingest.hpp"
#include "techgap/ontology.hpp"
#include "techgap/posting_list.hpp"

namespace techgap {

/// The three embedded stores of the materialized view.
enum class StoreKind : std::uint8_t { Table = 0, Graph = 1, Text = 2 };

inline constexpr std::array<StoreKind, 3> kAllStores{StoreKind::Table, StoreKind::Graph,
                                                     StoreKind::Text};

std::string_view to_string(StoreKind kind) noexcept;
std::optional<StoreKind> parse_store_kind(std::string_view text) noexcept;

struct EntityRecord {
  std::string entity_id;
  EntityKind kind = EntityKind::Technology;
  std::map<std::string, Scalar> properties;
};

nlohmann::json to_json(const EntityRecord& record);

/// Relational side: one row per entity, ordered by entity id.
class EntityTable {
 public:
  EntityTable() = default;
  explicit EntityTable(std::vector<EntityRecord> rows);

  std::span<const EntityRecord> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  const EntityRecord* find(std::string_view entity_id) const;
  std::optional<std::uint32_t> row_of(std::string_view entity_id) const;

 private:
  std::vector<EntityRecord> rows_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct NodeStats {
  std::size_t indegree = 0;
  std::size_t outdegree = 0;
  double clustering_coefficient = 0.0;
};

struct GraphNode {
  std::string entity_id;
  EntityKind kind = EntityKind::Technology;
  NodeStats stats;
};

struct GraphEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::CoOccurrence;
  Date timestamp{};
  double weight = 1.0;
  std::string origin;
};

/// Property-graph side: technology and organization nodes with the
/// timestamped relationship multiset between them.
class GraphStore {
 public:
  GraphStore() = default;
  GraphStore(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  std::span<const GraphNode> nodes() const { return nodes_; }
  std::span<const GraphEdge> edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }
  std::optional<NodeId> find(std::string_view entity_id) const;

  /// Simple undirected projection over the selected kinds, optionally only
  /// edges stamped on or before `until`.
  UndirectedGraph projection(EdgeKindMask mask = {}, std::optional<Date> until = {}) const;

  /// Calendar-year span of edge timestamps; nullopt without edges.
  std::optional<std::pair<int, int>> year_range() const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::string, NodeId> index_;
};

struct TextDocument {
  std::string source_id;
  std::string kind;  // patent | news | publication
  Date date{};
  std::string text;
  std::vector<std::string> technologies;   // tech entity ids
  std::vector<std::string> organizations;  // org entity ids
};

/// Text side: documents plus a normalized-term inverted index.
class TextIndex {
 public:
  TextIndex() = default;
  explicit TextIndex(std::vector<TextDocument> docs);

  std::span<const TextDocument> documents() const { return docs_; }
  const PostingList* postings(std::string_view term) const;

 private:
  std::vector<TextDocument> docs_;
  std::map<std::string, PostingList> terms_;
};

/// Concept key list with one compressed posting list per store.
class ForwardMapping {
 public:
  ForwardMapping() = default;
  explicit ForwardMapping(std::map<std::string, std::array<PostingList, 3>> postings)
      : postings_(std::move(postings)) {}

  std::vector<std::string> keys() const;
  const PostingList* postings(std::string_view concept_id, StoreKind store) const;
  const std::map<std::string, std::array<PostingList, 3>>& all() const { return postings_; }

 private:
  std::map<std::string, std::array<PostingList, 3>> postings_;
};

/// Per-store normalized surface string → concept. Partial.
class ReverseMapping {
 public:
  ReverseMapping() = default;
  explicit ReverseMapping(std::array<std::map<std::string, std::string>, 3> maps)
      : maps_(std::move(maps)) {}

  std::optional<std::string> lookup(StoreKind store, std::string_view surface) const;
  const std::map<std::string, std::string>& entries(StoreKind store) const {
    return maps_[static_cast<std::size_t>(store)];
  }

 private:
  std::array<std::map<std::string, std::string>, 3> maps_;
};

/// Explicit surface→concept assignment from the view script. An empty
/// store applies to all three stores.
struct ConceptOverride {
  std::optional<StoreKind> store;
  std::string surface;
  std::string concept_id;
};

/// Declarative view definition (view.toml).
struct ViewScript {
  std::string name = "view";
  std::filesystem::path ontology_path;
  std::map<SourceKind, std::vector<std::filesystem::path>> source_paths;
  std::optional<Date> as_of;
  unsigned min_cooccurrence = 1;
  std::vector<ConceptOverride> concept_map;

  /// Relative paths are resolved against the file's directory.
  static ViewScript load(const std::filesystem::path& path);
  static ViewScript parse_toml(std::string_view text, const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;
  static ViewScript from_json(const nlohmann::json& j);
};

/// Loads every source file named by the script; rejections are collected.
SourceBundle load_script_sources(const ViewScript& script, std::vector<LoadedBatch>* batches = nullptr);

/// One file per store component, each deterministic JSONL.
struct StoreDump {
  std::string entities;
  std::string edges;
  std::string postings;
  std::string documents;

  bool operator==(const StoreDump&) const = default;
  void write(const std::filesystem::path& dir) const;
};

/// Immutable materialized view.
class ViewSnapshot {
 public:
  const std::string& id() const { return id_; }
  Date as_of() const { return as_of_; }
  const Ontology& ontology() const { return *ontology_; }
  std::shared_ptr<const Ontology> ontology_ptr() const { return ontology_; }
  const SourceBundle& sources() const { return sources_; }
  const ViewScript& script() const { return script_; }
  const EntityTable& table() const { return table_; }
  const GraphStore& graph() const { return graph_; }
  const TextIndex& text() const { return text_; }
  const ForwardMapping& forward() const { return forward_; }
  const ReverseMapping& reverse() const { return reverse_; }

  /// Graph node ids posted under any of the concepts; unknown concepts
  /// contribute nothing.
  std::vector<NodeId> concepts_to_instances(const std::set<std::string>& concepts) const;
  std::optional<std::string> string_to_concept(StoreKind store, std::string_view surface) const;

  const StoreDump& dump() const { return dump_; }

 private:
  friend std::shared_ptr<const ViewSnapshot> materialize_view(std::shared_ptr<const Ontology>,
                                                              SourceBundle, ViewScript);
  ViewSnapshot() = default;

  std::string id_;
  Date as_of_{};
  std::shared_ptr<const Ontology> ontology_;
  SourceBundle sources_;
  ViewScript script_;
  EntityTable table_;
  GraphStore graph_;
  TextIndex text_;
  ForwardMapping forward_;
  ReverseMapping reverse_;
  StoreDump dump_;
};

using SnapshotPtr = std::shared_ptr<const ViewSnapshot>;

/// Builds the three stores, both mappings and node statistics.
/// Throws MappingConflict, OrphanEdge.
SnapshotPtr materialize_view(std::shared_ptr<const Ontology> ontology, SourceBundle sources,
                             ViewScript script);

/// Full rebuild over the previous sources plus `delta`.
SnapshotPtr refresh(const ViewSnapshot& previous, const SourceBundle& delta);

/// Current-snapshot slot: readers take a reference, one writer swaps.
class SnapshotHolder {
 public:
  SnapshotPtr current() const;
  void publish(SnapshotPtr snapshot);
  /// Serializes writers; hold it across materialize/refresh.
  std::unique_lock<std::mutex> writer_lock() { return std::unique_lock<std::mutex>(writer_); }

 private:
  mutable std::mutex read_;
  std::mutex writer_;
  SnapshotPtr current_;
};

}  // namespace techgap
