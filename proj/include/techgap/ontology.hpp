#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace techgap {

enum class Relation : std::uint8_t { SubclassOf = 0, ComponentOf = 1, SubpropertyOf = 2 };

inline constexpr std::size_t kRelationCount = 3;
inline constexpr std::array<Relation, kRelationCount> kAllRelations{
    Relation::SubclassOf, Relation::ComponentOf, Relation::SubpropertyOf};

std::string_view to_string(Relation relation) noexcept;
std::optional<Relation> parse_relation(std::string_view text) noexcept;

class RelationMask {
 public:
  constexpr RelationMask() = default;
  constexpr RelationMask(std::initializer_list<Relation> relations) {
    for (Relation r : relations) set(r);
  }

  constexpr RelationMask& set(Relation r) {
    bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(r));
    return *this;
  }
  constexpr bool contains(Relation r) const {
    return (bits_ >> static_cast<unsigned>(r)) & 1u;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const RelationMask&) const = default;

  /// subclassOf and componentOf: the relations query expansion follows.
  static constexpr RelationMask expansion_default() {
    return {Relation::SubclassOf, Relation::ComponentOf};
  }

 private:
  std::uint8_t bits_ = 0;
};

enum class NodeKind : std::uint8_t { Class, Individual };

using ConceptIndex = std::uint32_t;

struct ConceptNode {
  std::string concept_id;
  std::string preferred_label;
  std::vector<std::string> synonyms;
  NodeKind kind = NodeKind::Class;
};

/// `parent` is the broader concept: child subclassOf/componentOf parent.
struct OntologyEdge {
  std::string parent;
  std::string child;
  Relation relation = Relation::SubclassOf;

  auto operator<=>(const OntologyEdge&) const = default;
};

/// A stored path from a root, or from the parent of the nearest join node,
/// down to `path.back()`. Consecutive entries are joined by `relation` edges.
struct PathLabel {
  Relation relation = Relation::SubclassOf;
  std::vector<ConceptIndex> path;

  ConceptIndex node() const { return path.back(); }
};

struct LabelRef {
  Relation relation;
  std::uint32_t label;
};

/// One hit of the term-to-path index.
struct TermEntry {
  ConceptIndex concept_index;
  std::vector<LabelRef> labels;
};

struct ExpansionQuery {
  std::vector<std::string> pos;
  std::vector<std::string> neg;
  /// Edges from each positive seed; nullopt means unbounded.
  std::optional<unsigned> max_depth = 8;
  /// Negative terms exclude whole subtrees unless a bound is given.
  std::optional<unsigned> neg_max_depth;
  RelationMask relations = RelationMask::expansion_default();
};

nlohmann::json to_json(const ExpansionQuery& query);
ExpansionQuery expansion_query_from_json(const nlohmann::json& j);

/// Immutable ontology DAG with eagerly built path labels and a term-to-path
/// index. Reachability and query expansion consult only the labels.
class Ontology {
 public:
  Ontology() = default;
  Ontology(std::vector<ConceptNode> nodes, std::vector<OntologyEdge> edges);

  /// Reads the `{"format": 1, "nodes": [...], "edges": [...]}` document.
  static Ontology from_json(const nlohmann::json& doc);
  static Ontology load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// New ontology containing this one plus the given nodes and edges.
  Ontology with_additions(std::vector<ConceptNode> nodes,
                          std::vector<OntologyEdge> edges) const;

  std::size_t size() const { return nodes_.size(); }
  const ConceptNode& node(ConceptIndex index) const { return nodes_.at(index); }
  std::span<const ConceptNode> nodes() const { return nodes_; }
  std::span<const OntologyEdge> edges() const { return edges_; }

  std::optional<ConceptIndex> find(std::string_view concept_id) const;
  /// Throws UnknownConcept.
  ConceptIndex index_of(std::string_view concept_id) const;

  std::span<const ConceptIndex> parents(ConceptIndex node, Relation relation) const;
  std::span<const ConceptIndex> children(ConceptIndex node, Relation relation) const;
  bool is_root(ConceptIndex node, Relation relation) const {
    return parents(node, relation).empty();
  }

  std::vector<PathLabel> labels(ConceptIndex node, Relation relation) const;
  std::size_t label_count(Relation relation) const;

  /// Reflexive: a concept is its own descendant.
  bool is_descendant(ConceptIndex ancestor, ConceptIndex descendant, Relation relation) const;
  bool is_descendant(std::string_view ancestor, std::string_view descendant,
                     Relation relation) const;

  /// Concepts whose preferred label or a synonym normalizes to `term`.
  std::set<std::string> resolve_term(std::string_view term) const;
  std::span<const TermEntry> term_entries(std::string_view term) const;

  /// Concept ids of (pos closure, depth-bounded) minus (neg closure). Closures
  /// follow any mix of the query's relations downward.
  /// Throws UnknownTerm, EmptyExpansion, InvalidArgument.
  std::set<std::string> expand_query(const ExpansionQuery& query) const;

  /// Shortest label-derived distance from any seed to every concept within
  /// `max_depth`, following one relation downward.
  std::unordered_map<ConceptIndex, unsigned> descendants_within(
      std::span<const ConceptIndex> seeds, std::optional<unsigned> max_depth,
      Relation relation) const;
  /// As above over the union of the selected relations; a path may mix them.
  std::unordered_map<ConceptIndex, unsigned> descendants_within(
      std::span<const ConceptIndex> seeds, std::optional<unsigned> max_depth,
      RelationMask mask) const;

 private:
  struct Occurrence {
    std::uint32_t label;
    std::uint32_t position;
  };

  struct RelationIndex {
    std::vector<std::vector<ConceptIndex>> parents;
    std::vector<std::vector<ConceptIndex>> children;
    std::vector<PathLabel> labels;
    std::vector<std::vector<std::uint32_t>> node_labels;
    std::vector<std::vector<Occurrence>> occurrences;
  };

  void build();
  void build_labels(Relation relation);
  void build_term_index();
  std::set<ConceptIndex> closure(std::span<const ConceptIndex> seeds,
                                 std::optional<unsigned> max_depth, RelationMask mask) const;
  std::vector<ConceptIndex> resolve_or_throw(std::span<const std::string> terms) const;

  std::vector<ConceptNode> nodes_;
  std::vector<OntologyEdge> edges_;
  std::unordered_map<std::string, ConceptIndex> by_id_;
  std::array<RelationIndex, kRelationCount> relations_;
  std::unordered_map<std::string, std::vector<TermEntry>> terms_;
};

}  // namespace techgap
