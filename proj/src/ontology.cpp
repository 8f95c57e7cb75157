#include "techgap/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "techgap/error.hpp"
#include "techgap/text.hpp"

namespace techgap {

namespace {

std::size_t rel_slot(Relation r) { return static_cast<std::size_t>(r); }

NodeKind parse_node_kind(std::string_view text) {
  if (text == "class") return NodeKind::Class;
  if (text == "individual") return NodeKind::Individual;
  throw Error(ErrorCode::InvalidOntology, "unknown node kind '" + std::string(text) + "'");
}

std::string_view node_kind_name(NodeKind kind) {
  return kind == NodeKind::Class ? "class" : "individual";
}

}  // namespace

std::string_view to_string(Relation relation) noexcept {
  switch (relation) {
    case Relation::SubclassOf: return "subclassOf";
    case Relation::ComponentOf: return "componentOf";
    case Relation::SubpropertyOf: return "subpropertyOf";
  }
  return "subclassOf";
}

std::optional<Relation> parse_relation(std::string_view text) noexcept {
  for (Relation r : kAllRelations) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

nlohmann::json to_json(const ExpansionQuery& query) {
  nlohmann::json relations = nlohmann::json::array();
  for (Relation r : kAllRelations) {
    if (query.relations.contains(r)) relations.push_back(std::string(to_string(r)));
  }
  return {
      {"pos", query.pos},
      {"neg", query.neg},
      {"max_depth", query.max_depth ? nlohmann::json(*query.max_depth) : nlohmann::json(nullptr)},
      {"neg_max_depth",
       query.neg_max_depth ? nlohmann::json(*query.neg_max_depth) : nlohmann::json(nullptr)},
      {"relations", relations},
  };
}

ExpansionQuery expansion_query_from_json(const nlohmann::json& j) {
  ExpansionQuery q;
  q.pos = j.value("pos", std::vector<std::string>{});
  q.neg = j.value("neg", std::vector<std::string>{});
  if (j.contains("max_depth")) {
    q.max_depth = j["max_depth"].is_null() ? std::nullopt
                                           : std::optional<unsigned>(j["max_depth"].get<unsigned>());
  }
  if (j.contains("neg_max_depth") && !j["neg_max_depth"].is_null()) {
    q.neg_max_depth = j["neg_max_depth"].get<unsigned>();
  }
  if (j.contains("relations")) {
    RelationMask mask;
    for (const auto& r : j["relations"]) {
      auto rel = parse_relation(r.get<std::string>());
      if (!rel) throw Error(ErrorCode::InvalidArgument, "unknown relation " + r.dump());
      mask.set(*rel);
    }
    q.relations = mask;
  }
  return q;
}

Ontology::Ontology(std::vector<ConceptNode> nodes, std::vector<OntologyEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  build();
}

Ontology Ontology::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidOntology, "ontology document must be an object");
  if (doc.value("format", 0) != 1) {
    throw Error(ErrorCode::InvalidOntology, "unsupported ontology format (expected \"format\": 1)");
  }
  std::vector<ConceptNode> nodes;
  for (const auto& n : doc.value("nodes", nlohmann::json::array())) {
    ConceptNode node;
    node.concept_id = n.at("id").get<std::string>();
    node.preferred_label = n.at("label").get<std::string>();
    node.synonyms = n.value("synonyms", std::vector<std::string>{});
    node.kind = parse_node_kind(n.value("kind", std::string("class")));
    nodes.push_back(std::move(node));
  }
  std::vector<OntologyEdge> edges;
  for (const auto& e : doc.value("edges", nlohmann::json::array())) {
    std::string rel_text = e.value("relation", std::string("subclassOf"));
    auto rel = parse_relation(rel_text);
    if (!rel) throw Error(ErrorCode::InvalidOntology, "unsupported relation '" + rel_text + "'");
    edges.push_back({e.at("parent").get<std::string>(), e.at("child").get<std::string>(), *rel});
  }
  return Ontology(std::move(nodes), std::move(edges));
}

Ontology Ontology::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open ontology " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "ontology " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Ontology::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"id", n.concept_id},
                     {"label", n.preferred_label},
                     {"synonyms", n.synonyms},
                     {"kind", std::string(node_kind_name(n.kind))}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) {
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"relation", std::string(techgap::to_string(e.relation))}});
  }
  return {{"format", 1}, {"nodes", nodes}, {"edges", edges}};
}

Ontology Ontology::with_additions(std::vector<ConceptNode> nodes,
                                  std::vector<OntologyEdge> edges) const {
  std::vector<ConceptNode> all_nodes = nodes_;
  all_nodes.insert(all_nodes.end(), std::make_move_iterator(nodes.begin()),
                   std::make_move_iterator(nodes.end()));
  std::vector<OntologyEdge> all_edges = edges_;
  all_edges.insert(all_edges.end(), edges.begin(), edges.end());
  return Ontology(std::move(all_nodes), std::move(all_edges));
}

void Ontology::build() {
  by_id_.clear();
  for (ConceptIndex i = 0; i < nodes_.size(); ++i) {
    const ConceptNode& n = nodes_[i];
    if (n.concept_id.empty()) throw Error(ErrorCode::InvalidOntology, "empty concept id");
    if (normalize_term(n.preferred_label).empty()) {
      throw Error(ErrorCode::InvalidOntology, "concept " + n.concept_id + " has an empty label");
    }
    std::set<std::string> seen{normalize_term(n.preferred_label)};
    for (const auto& s : n.synonyms) {
      if (!seen.insert(normalize_term(s)).second) {
        throw Error(ErrorCode::InvalidOntology,
                    "concept " + n.concept_id + " repeats synonym '" + s + "'");
      }
    }
    if (!by_id_.emplace(n.concept_id, i).second) {
      throw Error(ErrorCode::DuplicateConceptId, "duplicate concept id " + n.concept_id);
    }
  }

  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  for (auto& rel : relations_) {
    rel = RelationIndex{};
    rel.parents.assign(nodes_.size(), {});
    rel.children.assign(nodes_.size(), {});
  }
  for (const auto& e : edges_) {
    auto p = by_id_.find(e.parent);
    auto c = by_id_.find(e.child);
    if (p == by_id_.end() || c == by_id_.end()) {
      throw Error(ErrorCode::DanglingEdge, "edge " + e.parent + " -> " + e.child +
                                               " references an unknown concept");
    }
    if (p->second == c->second) {
      throw Error(ErrorCode::CycleDetected, std::string(techgap::to_string(e.relation)) +
                                                ": self-loop at " + e.parent);
    }
    auto& rel = relations_[rel_slot(e.relation)];
    rel.parents[c->second].push_back(p->second);
    rel.children[p->second].push_back(c->second);
  }
  for (auto& rel : relations_) {
    for (auto& v : rel.parents) std::sort(v.begin(), v.end());
    for (auto& v : rel.children) std::sort(v.begin(), v.end());
  }
  for (ConceptIndex i = 0; i < nodes_.size(); ++i) {
    if (relations_[rel_slot(Relation::SubpropertyOf)].parents[i].size() > 1) {
      throw Error(ErrorCode::InvalidOntology,
                  "subpropertyOf must form a tree; " + nodes_[i].concept_id + " has several parents");
    }
  }

  for (Relation r : kAllRelations) build_labels(r);
  build_term_index();
}

void Ontology::build_labels(Relation relation) {
  RelationIndex& rel = relations_[rel_slot(relation)];
  const std::size_t n = nodes_.size();

  // Kahn's algorithm; the smallest ready index goes first for determinism.
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = rel.parents[v].size();
  std::priority_queue<ConceptIndex, std::vector<ConceptIndex>, std::greater<>> ready;
  for (ConceptIndex v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<ConceptIndex> order;
  order.reserve(n);
  while (!ready.empty()) {
    ConceptIndex v = ready.top();
    ready.pop();
    order.push_back(v);
    for (ConceptIndex c : rel.children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    // Walk parents inside the unresolved remainder until a node repeats.
    ConceptIndex start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<ConceptIndex> walk{start};
    std::vector<int> seen_at(n, -1);
    seen_at[start] = 0;
    for (;;) {
      ConceptIndex cur = walk.back();
      ConceptIndex next = cur;
      for (ConceptIndex p : rel.parents[cur]) {
        if (indegree[p] != 0) {
          next = p;
          break;
        }
      }
      if (seen_at[next] >= 0) {
        walk.erase(walk.begin(), walk.begin() + seen_at[next]);
        break;
      }
      seen_at[next] = static_cast<int>(walk.size());
      walk.push_back(next);
    }
    std::ostringstream msg;
    msg << techgap::to_string(relation) << " cycle through";
    for (ConceptIndex v : walk) msg << ' ' << nodes_[v].concept_id;
    throw Error(ErrorCode::CycleDetected, msg.str());
  }

  rel.node_labels.assign(n, {});
  auto add_label = [&](ConceptIndex owner, std::vector<ConceptIndex> path) {
    rel.node_labels[owner].push_back(static_cast<std::uint32_t>(rel.labels.size()));
    rel.labels.push_back({relation, std::move(path)});
  };

  for (ConceptIndex v : order) {
    const auto& parents = rel.parents[v];
    if (parents.empty()) {
      add_label(v, {v});
    } else if (parents.size() == 1) {
      // Copy first: add_label may reallocate rel.labels.
      std::vector<std::vector<ConceptIndex>> inherited;
      for (std::uint32_t l : rel.node_labels[parents.front()]) inherited.push_back(rel.labels[l].path);
      for (auto& path : inherited) {
        path.push_back(v);
        add_label(v, std::move(path));
      }
    } else {
      // Join node: one full path per distinct root, plus a short path from
      // every parent so ancestors above the join stay reachable by chasing.
      std::vector<std::vector<ConceptIndex>> best_per_root;
      for (ConceptIndex p : parents) {
        for (std::uint32_t l : rel.node_labels[p]) {
          const auto& path = rel.labels[l].path;
          if (!rel.parents[path.front()].empty()) continue;
          auto it = std::find_if(best_per_root.begin(), best_per_root.end(),
                                 [&](const auto& b) { return b.front() == path.front(); });
          if (it == best_per_root.end()) {
            best_per_root.push_back(path);
          } else if (path < *it) {
            *it = path;
          }
        }
      }
      std::sort(best_per_root.begin(), best_per_root.end());
      for (auto& path : best_per_root) {
        path.push_back(v);
        add_label(v, std::move(path));
      }
      for (ConceptIndex p : parents) {
        // A root parent already contributed exactly {p, v} above.
        if (rel.parents[p].empty()) continue;
        add_label(v, {p, v});
      }
    }
  }

  rel.occurrences.assign(n, {});
  for (std::uint32_t l = 0; l < rel.labels.size(); ++l) {
    const auto& path = rel.labels[l].path;
    for (std::uint32_t pos = 0; pos < path.size(); ++pos) {
      rel.occurrences[path[pos]].push_back({l, pos});
    }
  }
}

void Ontology::build_term_index() {
  terms_.clear();
  for (ConceptIndex i = 0; i < nodes_.size(); ++i) {
    std::vector<LabelRef> refs;
    for (Relation r : kAllRelations) {
      for (std::uint32_t l : relations_[rel_slot(r)].node_labels[i]) refs.push_back({r, l});
    }
    std::set<std::string> surfaces{normalize_term(nodes_[i].preferred_label)};
    for (const auto& s : nodes_[i].synonyms) surfaces.insert(normalize_term(s));
    for (const auto& s : surfaces) terms_[s].push_back({i, refs});
  }
}

std::optional<ConceptIndex> Ontology::find(std::string_view concept_id) const {
  auto it = by_id_.find(std::string(concept_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

ConceptIndex Ontology::index_of(std::string_view concept_id) const {
  auto idx = find(concept_id);
  if (!idx) throw Error(ErrorCode::UnknownConcept, "unknown concept " + std::string(concept_id));
  return *idx;
}

std::span<const ConceptIndex> Ontology::parents(ConceptIndex node, Relation relation) const {
  return relations_[rel_slot(relation)].parents.at(node);
}

std::span<const ConceptIndex> Ontology::children(ConceptIndex node, Relation relation) const {
  return relations_[rel_slot(relation)].children.at(node);
}

std::vector<PathLabel> Ontology::labels(ConceptIndex node, Relation relation) const {
  const RelationIndex& rel = relations_[rel_slot(relation)];
  std::vector<PathLabel> out;
  for (std::uint32_t l : rel.node_labels.at(node)) out.push_back(rel.labels[l]);
  return out;
}

std::size_t Ontology::label_count(Relation relation) const {
  return relations_[rel_slot(relation)].labels.size();
}

bool Ontology::is_descendant(ConceptIndex ancestor, ConceptIndex descendant,
                             Relation relation) const {
  if (ancestor >= nodes_.size() || descendant >= nodes_.size()) {
    throw Error(ErrorCode::UnknownConcept, "concept index out of range");
  }
  if (ancestor == descendant) return true;
  const RelationIndex& rel = relations_[rel_slot(relation)];
  // Scan the descendant's labels; a label that starts below a join node
  // hands off to the labels of its first element.
  std::vector<char> visited(nodes_.size(), 0);
  std::vector<ConceptIndex> pending{descendant};
  visited[descendant] = 1;
  while (!pending.empty()) {
    ConceptIndex cur = pending.back();
    pending.pop_back();
    for (std::uint32_t l : rel.node_labels[cur]) {
      const auto& path = rel.labels[l].path;
      if (std::find(path.begin(), path.end(), ancestor) != path.end()) return true;
      ConceptIndex head = path.front();
      if (!rel.parents[head].empty() && !visited[head]) {
        visited[head] = 1;
        pending.push_back(head);
      }
    }
  }
  return false;
}

bool Ontology::is_descendant(std::string_view ancestor, std::string_view descendant,
                             Relation relation) const {
  return is_descendant(index_of(ancestor), index_of(descendant), relation);
}

std::span<const TermEntry> Ontology::term_entries(std::string_view term) const {
  auto it = terms_.find(normalize_term(term));
  if (it == terms_.end()) return {};
  return it->second;
}

std::set<std::string> Ontology::resolve_term(std::string_view term) const {
  std::set<std::string> out;
  for (const auto& entry : term_entries(term)) out.insert(nodes_[entry.concept_index].concept_id);
  return out;
}

std::unordered_map<ConceptIndex, unsigned> Ontology::descendants_within(
    std::span<const ConceptIndex> seeds, std::optional<unsigned> max_depth,
    Relation relation) const {
  return descendants_within(seeds, max_depth, RelationMask{relation});
}

std::unordered_map<ConceptIndex, unsigned> Ontology::descendants_within(
    std::span<const ConceptIndex> seeds, std::optional<unsigned> max_depth,
    RelationMask mask) const {
  std::unordered_map<ConceptIndex, unsigned> dist;
  using Item = std::pair<unsigned, ConceptIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (ConceptIndex s : seeds) {
    if (s >= nodes_.size()) throw Error(ErrorCode::UnknownConcept, "concept index out of range");
    if (dist.emplace(s, 0).second) queue.push({0, s});
  }
  // Every label containing `cur` at position p witnesses a path of
  // len-1-p edges from `cur` to the label's owner. Paths may switch
  // relation at any node, so all selected label sets relax together.
  while (!queue.empty()) {
    auto [d, cur] = queue.top();
    queue.pop();
    if (dist[cur] < d) continue;
    for (Relation r : kAllRelations) {
      if (!mask.contains(r)) continue;
      const RelationIndex& rel = relations_[rel_slot(r)];
      for (const Occurrence& occ : rel.occurrences[cur]) {
        const auto& path = rel.labels[occ.label].path;
        unsigned nd = d + static_cast<unsigned>(path.size() - 1 - occ.position);
        if (max_depth && nd > *max_depth) continue;
        ConceptIndex owner = path.back();
        auto it = dist.find(owner);
        if (it == dist.end() || nd < it->second) {
          dist[owner] = nd;
          queue.push({nd, owner});
        }
      }
    }
  }
  return dist;
}

std::set<ConceptIndex> Ontology::closure(std::span<const ConceptIndex> seeds,
                                         std::optional<unsigned> max_depth,
                                         RelationMask mask) const {
  std::set<ConceptIndex> out(seeds.begin(), seeds.end());
  for (const auto& [node, d] : descendants_within(seeds, max_depth, mask)) out.insert(node);
  return out;
}

std::vector<ConceptIndex> Ontology::resolve_or_throw(std::span<const std::string> terms) const {
  std::vector<ConceptIndex> out;
  for (const auto& t : terms) {
    auto entries = term_entries(t);
    if (entries.empty()) throw Error(ErrorCode::UnknownTerm, "unknown term '" + t + "'");
    for (const auto& e : entries) out.push_back(e.concept_index);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::set<std::string> Ontology::expand_query(const ExpansionQuery& query) const {
  if (query.pos.empty()) throw Error(ErrorCode::InvalidArgument, "expansion needs a positive term");
  std::set<std::string> pos_norm;
  for (const auto& t : query.pos) pos_norm.insert(normalize_term(t));
  for (const auto& t : query.neg) {
    if (pos_norm.count(normalize_term(t))) {
      throw Error(ErrorCode::InvalidArgument, "term '" + t + "' is both positive and negative");
    }
  }
  std::vector<ConceptIndex> pos_seeds = resolve_or_throw(query.pos);
  std::vector<ConceptIndex> neg_seeds = resolve_or_throw(query.neg);

  std::set<ConceptIndex> included = closure(pos_seeds, query.max_depth, query.relations);
  if (!neg_seeds.empty()) {
    for (ConceptIndex c : closure(neg_seeds, query.neg_max_depth, query.relations)) included.erase(c);
  }
  if (included.empty()) {
    throw Error(ErrorCode::EmptyExpansion, "negative terms remove every expanded concept");
  }
  std::set<std::string> out;
  for (ConceptIndex c : included) out.insert(nodes_[c].concept_id);
  return out;
}

}  // namespace techgap
