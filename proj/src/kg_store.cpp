#include "techgap/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "techgap/error.hpp"
#include "toml.hpp"

namespace techgap {

std::string_view to_string(StoreKind kind) noexcept {
  switch (kind) {
    case StoreKind::Table: return "table";
    case StoreKind::Graph: return "graph";
    case StoreKind::Text: return "text";
  }
  return "table";
}

std::optional<StoreKind> parse_store_kind(std::string_view text) noexcept {
  for (StoreKind k : kAllStores) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

nlohmann::json to_json(const EntityRecord& record) {
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [k, v] : record.properties) props[k] = to_json(v);
  return {{"id", record.entity_id},
          {"kind", std::string(to_string(record.kind))},
          {"properties", props}};
}

// ---- EntityTable --------------------------------------------------------

EntityTable::EntityTable(std::vector<EntityRecord> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const auto& a, const auto& b) { return a.entity_id < b.entity_id; });
  for (std::uint32_t i = 0; i < rows_.size(); ++i) {
    if (!index_.emplace(rows_[i].entity_id, i).second) {
      throw Error(ErrorCode::SchemaViolation, "duplicate entity id " + rows_[i].entity_id);
    }
  }
}

const EntityRecord* EntityTable::find(std::string_view entity_id) const {
  auto row = row_of(entity_id);
  return row ? &rows_[*row] : nullptr;
}

std::optional<std::uint32_t> EntityTable::row_of(std::string_view entity_id) const {
  auto it = index_.find(std::string(entity_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---- GraphStore ---------------------------------------------------------

GraphStore::GraphStore(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (NodeId i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].entity_id, i);
}

std::optional<NodeId> GraphStore::find(std::string_view entity_id) const {
  auto it = index_.find(std::string(entity_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

UndirectedGraph GraphStore::projection(EdgeKindMask mask, std::optional<Date> until) const {
  UndirectedGraph g(nodes_.size());
  for (const auto& e : edges_) {
    if (!mask.contains(e.kind)) continue;
    if (until && e.timestamp > *until) continue;
    g.add_edge(e.src, e.dst);
  }
  return g;
}

std::optional<std::pair<int, int>> GraphStore::year_range() const {
  if (edges_.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(edges_.begin(), edges_.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  return std::make_pair(year_of(lo->timestamp), year_of(hi->timestamp));
}

// ---- TextIndex ----------------------------------------------------------

TextIndex::TextIndex(std::vector<TextDocument> docs) : docs_(std::move(docs)) {
  std::map<std::string, std::vector<std::uint32_t>> ids;
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    std::set<std::string> terms;
    for (const auto& tech : docs_[d].technologies) terms.insert(tech.substr(5));  // strip "tech:"
    for (const auto& t : terms) ids[t].push_back(d);
  }
  for (auto& [term, list] : ids) terms_.emplace(term, PostingList::encode(list));
}

const PostingList* TextIndex::postings(std::string_view term) const {
  auto it = terms_.find(normalize_term(term));
  return it == terms_.end() ? nullptr : &it->second;
}

// ---- Mappings -----------------------------------------------------------

std::vector<std::string> ForwardMapping::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : postings_) out.push_back(k);
  return out;
}

const PostingList* ForwardMapping::postings(std::string_view concept_id, StoreKind store) const {
  auto it = postings_.find(std::string(concept_id));
  if (it == postings_.end()) return nullptr;
  return &it->second[static_cast<std::size_t>(store)];
}

std::optional<std::string> ReverseMapping::lookup(StoreKind store, std::string_view surface) const {
  const auto& m = maps_[static_cast<std::size_t>(store)];
  auto it = m.find(normalize_term(surface));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

// ---- ViewScript ---------------------------------------------------------

ViewScript ViewScript::parse_toml(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("view script: ") + std::string(e.description()));
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  ViewScript script;
  script.name = tbl["name"].value_or(std::string("view"));
  if (auto onto = tbl["ontology"].value<std::string>()) {
    script.ontology_path = resolve(*onto);
  } else {
    throw Error(ErrorCode::SchemaViolation, "view script needs an 'ontology' path");
  }
  if (auto as_of = tbl["as_of"].value<std::string>()) {
    script.as_of = parse_date(*as_of);
    if (!script.as_of) throw Error(ErrorCode::SchemaViolation, "view script: bad as_of date");
  }
  script.min_cooccurrence = tbl["min_cooccurrence"].value_or(1u);
  if (auto* sources = tbl["sources"].as_table()) {
    for (const auto& [key, node] : *sources) {
      auto kind = parse_source_kind(key.str());
      if (!kind) throw Error(ErrorCode::SchemaViolation, "unknown source kind " + std::string(key.str()));
      auto* files = node.as_array();
      if (!files) throw Error(ErrorCode::SchemaViolation, "sources entries must be arrays of paths");
      for (const auto& f : *files) {
        auto s = f.value<std::string>();
        if (!s) throw Error(ErrorCode::SchemaViolation, "source paths must be strings");
        script.source_paths[*kind].push_back(resolve(*s));
      }
    }
  }
  if (auto* overrides = tbl["concept_map"].as_array()) {
    for (const auto& node : *overrides) {
      const auto* entry = node.as_table();
      if (!entry) throw Error(ErrorCode::SchemaViolation, "concept_map entries must be tables");
      ConceptOverride o;
      if (auto store = (*entry)["store"].value<std::string>()) {
        o.store = parse_store_kind(*store);
        if (!o.store) throw Error(ErrorCode::SchemaViolation, "unknown store " + *store);
      }
      o.surface = (*entry)["surface"].value_or(std::string());
      o.concept_id = (*entry)["concept"].value_or(std::string());
      if (o.surface.empty() || o.concept_id.empty()) {
        throw Error(ErrorCode::SchemaViolation, "concept_map entries need surface and concept");
      }
      script.concept_map.push_back(std::move(o));
    }
  }
  return script;
}

ViewScript ViewScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open view script " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path.parent_path());
}

nlohmann::json ViewScript::to_json() const {
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [kind, paths] : source_paths) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : paths) list.push_back(p.string());
    sources[std::string(techgap::to_string(kind))] = list;
  }
  nlohmann::json overrides = nlohmann::json::array();
  for (const auto& o : concept_map) {
    overrides.push_back({{"store", o.store ? nlohmann::json(std::string(techgap::to_string(*o.store)))
                                           : nlohmann::json(nullptr)},
                         {"surface", o.surface},
                         {"concept", o.concept_id}});
  }
  return {{"name", name},
          {"ontology", ontology_path.string()},
          {"as_of", as_of ? nlohmann::json(format_date(*as_of)) : nlohmann::json(nullptr)},
          {"min_cooccurrence", min_cooccurrence},
          {"sources", sources},
          {"concept_map", overrides}};
}

ViewScript ViewScript::from_json(const nlohmann::json& j) {
  ViewScript s;
  s.name = j.value("name", std::string("view"));
  s.ontology_path = j.value("ontology", std::string());
  if (j.contains("as_of") && !j["as_of"].is_null()) s.as_of = parse_date(j["as_of"].get<std::string>());
  s.min_cooccurrence = j.value("min_cooccurrence", 1u);
  const nlohmann::json sources = j.value("sources", nlohmann::json::object());
  for (const auto& [key, list] : sources.items()) {
    auto kind = parse_source_kind(key);
    if (!kind) throw Error(ErrorCode::SchemaViolation, "unknown source kind " + key);
    for (const auto& p : list) s.source_paths[*kind].push_back(p.get<std::string>());
  }
  for (const auto& o : j.value("concept_map", nlohmann::json::array())) {
    ConceptOverride co;
    if (!o["store"].is_null()) co.store = parse_store_kind(o["store"].get<std::string>());
    co.surface = o.at("surface").get<std::string>();
    co.concept_id = o.at("concept").get<std::string>();
    s.concept_map.push_back(std::move(co));
  }
  return s;
}

SourceBundle load_script_sources(const ViewScript& script, std::vector<LoadedBatch>* batches) {
  SourceBundle bundle;
  for (const auto& [kind, paths] : script.source_paths) {
    for (const auto& p : paths) {
      LoadedBatch batch = load_source(kind, p);
      bundle.append(batch.records);
      if (batches) batches->push_back(std::move(batch));
    }
  }
  return bundle;
}

void StoreDump::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    out << content;
  };
  put("entities.jsonl", entities);
  put("edges.jsonl", edges);
  put("postings.jsonl", postings);
  put("documents.jsonl", documents);
}

// ---- Snapshot -----------------------------------------------------------

std::vector<NodeId> ViewSnapshot::concepts_to_instances(const std::set<std::string>& concepts) const {
  std::vector<const PostingList*> lists;
  for (const auto& c : concepts) {
    if (const PostingList* p = forward_.postings(c, StoreKind::Graph)) lists.push_back(p);
  }
  return union_postings(lists);
}

std::optional<std::string> ViewSnapshot::string_to_concept(StoreKind store,
                                                           std::string_view surface) const {
  return reverse_.lookup(store, surface);
}

namespace {

struct EntityBuilder {
  std::map<std::string, EntityRecord> records;

  EntityRecord& ensure(const std::string& id, EntityKind kind, std::string_view name) {
    auto [it, inserted] = records.try_emplace(id);
    if (inserted) {
      it->second.entity_id = id;
      it->second.kind = kind;
      it->second.properties["name"] = std::string(name);
      if (kind == EntityKind::Organization) {
        for (const char* m : {"patent_count", "publication_count", "award_total", "news_mentions"}) {
          it->second.properties[m] = 0.0;
        }
      }
    }
    return it->second;
  }
  EntityRecord& org(std::string_view name) {
    return ensure(org_entity_id(name), EntityKind::Organization, name);
  }
  EntityRecord& tech(std::string_view name) {
    return ensure(tech_entity_id(name), EntityKind::Technology, name);
  }
  static void bump(EntityRecord& r, const char* key, double by) {
    r.properties[key] = std::get<double>(r.properties[key]) + by;
  }
};

std::vector<std::string> unique_sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<std::uint32_t> unique_sorted_ids(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string strip_tech(const std::string& id) { return id.substr(5); }

}  // namespace

SnapshotPtr materialize_view(std::shared_ptr<const Ontology> ontology, SourceBundle sources,
                             ViewScript script) {
  if (!ontology) throw Error(ErrorCode::MissingSnapshot, "materialization needs an ontology");
  sources.canonicalize();
  std::shared_ptr<ViewSnapshot> snap(new ViewSnapshot());
  snap->ontology_ = ontology;

  // Entity tables.
  EntityBuilder eb;
  std::optional<Date> latest;
  auto see_date = [&](Date d) {
    if (!latest || d > *latest) latest = d;
  };
  std::vector<TextDocument> docs;
  std::set<std::string> table_surfaces, text_surfaces;

  for (const auto& p : sources.patents) {
    see_date(p.grant_date);
    EntityRecord& row = eb.ensure("patent:" + p.patent_id, EntityKind::Patent, p.title);
    row.properties["grant_date"] = format_date(p.grant_date);
    row.properties["assignee_count"] = static_cast<double>(p.assignees.size());
    TextDocument doc{"patent:" + p.patent_id, "patent", p.grant_date,
                     p.title + "\n" + p.abstract_text, {}, {}};
    for (const auto& a : unique_sorted(p.assignees)) {
      EntityBuilder::bump(eb.org(a), "patent_count", 1.0);
      doc.organizations.push_back(org_entity_id(a));
    }
    for (const auto& t : p.terms) {
      eb.tech(t);
      table_surfaces.insert(normalize_term(t));
      text_surfaces.insert(normalize_term(t));
      doc.technologies.push_back(tech_entity_id(t));
    }
    for (const auto& t : p.ip_transfers) {
      see_date(t.date);
      eb.org(t.from);
      eb.org(t.to);
    }
    doc.technologies = unique_sorted(doc.technologies);
    doc.organizations = unique_sorted(doc.organizations);
    docs.push_back(std::move(doc));
  }
  for (const auto& d : sources.news) {
    see_date(d.publish_date);
    const bool publication = d.kind == DocumentKind::Publication;
    EntityRecord& row = eb.ensure("doc:" + d.doc_id, EntityKind::Document, d.doc_id);
    row.properties["doc_kind"] = std::string(publication ? "publication" : "news");
    row.properties["publish_date"] = format_date(d.publish_date);
    TextDocument doc{"doc:" + d.doc_id, publication ? "publication" : "news", d.publish_date, d.body, {}, {}};
    for (const auto& m : d.mentions) {
      if (m.kind == MentionKind::Organization) {
        eb.org(m.surface);
        doc.organizations.push_back(org_entity_id(m.surface));
      } else {
        eb.tech(m.surface);
        table_surfaces.insert(normalize_term(m.surface));
        text_surfaces.insert(normalize_term(m.surface));
        doc.technologies.push_back(tech_entity_id(m.surface));
      }
    }
    doc.technologies = unique_sorted(doc.technologies);
    doc.organizations = unique_sorted(doc.organizations);
    for (const auto& o : doc.organizations) {
      EntityBuilder::bump(eb.records.at(o), publication ? "publication_count" : "news_mentions", 1.0);
    }
    docs.push_back(std::move(doc));
  }
  for (const auto& f : sources.funding) {
    see_date(f.start_date);
    EntityRecord& row = eb.ensure("award:" + f.award_id, EntityKind::Award, f.award_id);
    row.properties["recipient"] = org_entity_id(f.recipient);
    row.properties["amount"] = f.amount;
    row.properties["start_date"] = format_date(f.start_date);
    EntityBuilder::bump(eb.org(f.recipient), "award_total", f.amount);
    for (const auto& t : f.terms) {
      eb.tech(t);
      table_surfaces.insert(normalize_term(t));
    }
  }
  for (const auto& p : sources.partnerships) {
    see_date(p.since_date);
    eb.org(p.org_a);
    eb.org(p.org_b);
  }

  std::vector<EntityRecord> rows;
  rows.reserve(eb.records.size());
  for (auto& [id, r] : eb.records) rows.push_back(std::move(r));
  snap->table_ = EntityTable(std::move(rows));

  // Graph store: technologies and organizations are nodes.
  std::vector<GraphNode> nodes;
  for (const auto& r : snap->table_.rows()) {
    if (r.kind == EntityKind::Technology || r.kind == EntityKind::Organization) {
      nodes.push_back({r.entity_id, r.kind, {}});
    }
  }
  std::unordered_map<std::string, NodeId> node_of;
  for (NodeId i = 0; i < nodes.size(); ++i) node_of.emplace(nodes[i].entity_id, i);

  std::vector<GraphEdge> graph_edges;
  for (const auto& e : derive_relationships(sources, {script.min_cooccurrence})) {
    auto s = node_of.find(e.src);
    auto d = node_of.find(e.dst);
    if (s == node_of.end() || d == node_of.end()) {
      throw Error(ErrorCode::OrphanEdge, "edge " + e.src + " -> " + e.dst + " has no entity");
    }
    graph_edges.push_back({s->second, d->second, e.kind, e.timestamp, e.weight, e.origin});
    ++nodes[s->second].stats.outdegree;
    ++nodes[d->second].stats.indegree;
  }
  {
    UndirectedGraph g(nodes.size());
    for (const auto& e : graph_edges) g.add_edge(e.src, e.dst);
    for (NodeId i = 0; i < nodes.size(); ++i) nodes[i].stats.clustering_coefficient = clustering_coefficient(g, i);
  }
  snap->graph_ = GraphStore(std::move(nodes), std::move(graph_edges));

  std::sort(docs.begin(), docs.end(),
            [](const auto& a, const auto& b) { return a.source_id < b.source_id; });
  snap->text_ = TextIndex(std::move(docs));

  // Reverse mapping: explicit overrides first, then unambiguous ontology
  // resolution. Ambiguous or unknown surfaces stay unmapped.
  std::set<std::string> graph_surfaces;
  for (const auto& n : snap->graph_.nodes()) {
    if (n.kind == EntityKind::Technology) graph_surfaces.insert(strip_tech(n.entity_id));
  }
  std::array<std::map<std::string, std::string>, 3> reverse;
  for (const auto& o : script.concept_map) {
    if (!ontology->find(o.concept_id)) {
      throw Error(ErrorCode::UnknownConcept, "concept_map names unknown concept " + o.concept_id);
    }
    const std::string surface = normalize_term(o.surface);
    for (StoreKind store : kAllStores) {
      if (o.store && *o.store != store) continue;
      auto& m = reverse[static_cast<std::size_t>(store)];
      auto [it, inserted] = m.emplace(surface, o.concept_id);
      if (!inserted && it->second != o.concept_id) {
        throw Error(ErrorCode::MappingConflict, "'" + o.surface + "' maps to both " + it->second +
                                                    " and " + o.concept_id + " in the " +
                                                    std::string(to_string(store)) + " store");
      }
    }
  }
  const std::array<const std::set<std::string>*, 3> surfaces{&table_surfaces, &graph_surfaces,
                                                             &text_surfaces};
  for (StoreKind store : kAllStores) {
    auto& m = reverse[static_cast<std::size_t>(store)];
    for (const auto& s : *surfaces[static_cast<std::size_t>(store)]) {
      if (m.count(s)) continue;
      auto concepts = ontology->resolve_term(s);
      if (concepts.size() == 1) m.emplace(s, *concepts.begin());
    }
  }
  snap->reverse_ = ReverseMapping(reverse);

  // Forward mapping.
  std::map<std::string, std::array<std::vector<std::uint32_t>, 3>> forward_ids;
  auto post = [&](StoreKind store, const std::string& surface_norm, std::uint32_t id) {
    auto concept_id = snap->reverse_.lookup(store, surface_norm);
    if (concept_id) forward_ids[*concept_id][static_cast<std::size_t>(store)].push_back(id);
  };
  const auto& table = snap->table_;
  for (std::uint32_t row = 0; row < table.size(); ++row) {
    const auto& r = table.rows()[row];
    if (r.kind == EntityKind::Technology) post(StoreKind::Table, strip_tech(r.entity_id), row);
  }
  for (const auto& p : sources.patents) {
    auto row = *table.row_of("patent:" + p.patent_id);
    for (const auto& t : p.terms) post(StoreKind::Table, normalize_term(t), row);
  }
  for (const auto& f : sources.funding) {
    auto row = *table.row_of("award:" + f.award_id);
    for (const auto& t : f.terms) post(StoreKind::Table, normalize_term(t), row);
  }
  for (const auto& d : sources.news) {
    auto row = *table.row_of("doc:" + d.doc_id);
    for (const auto& m : d.mentions) {
      if (m.kind == MentionKind::Technology) post(StoreKind::Table, normalize_term(m.surface), row);
    }
  }
  for (NodeId n = 0; n < snap->graph_.node_count(); ++n) {
    const auto& node = snap->graph_.node(n);
    if (node.kind == EntityKind::Technology) post(StoreKind::Graph, strip_tech(node.entity_id), n);
  }
  for (std::uint32_t d = 0; d < snap->text_.documents().size(); ++d) {
    for (const auto& t : snap->text_.documents()[d].technologies) post(StoreKind::Text, strip_tech(t), d);
  }
  std::map<std::string, std::array<PostingList, 3>> forward;
  for (auto& [concept_id, lists] : forward_ids) {
    auto& out = forward[concept_id];
    for (std::size_t s = 0; s < 3; ++s) {
      out[s] = PostingList::encode(unique_sorted_ids(lists[s]));
    }
  }
  snap->forward_ = ForwardMapping(std::move(forward));

  snap->sources_ = std::move(sources);
  snap->script_ = std::move(script);
  snap->as_of_ = snap->script_.as_of ? *snap->script_.as_of : (latest ? *latest : Date{});

  // Dumps and content-derived id.
  std::ostringstream ent, edg, pst, doc;
  for (const auto& r : snap->table_.rows()) ent << to_json(r).dump() << '\n';
  for (const auto& e : snap->graph_.edges()) {
    edg << nlohmann::json{{"src", snap->graph_.node(e.src).entity_id},
                          {"dst", snap->graph_.node(e.dst).entity_id},
                          {"kind", std::string(to_string(e.kind))},
                          {"timestamp", format_date(e.timestamp)},
                          {"weight", e.weight},
                          {"origin", e.origin}}
               .dump()
        << '\n';
  }
  for (const auto& [concept_id, lists] : snap->forward_.all()) {
    nlohmann::json line = {{"type", "forward"}, {"concept", concept_id}};
    for (StoreKind s : kAllStores) line[std::string(to_string(s))] = lists[static_cast<std::size_t>(s)].decode();
    pst << line.dump() << '\n';
  }
  for (StoreKind s : kAllStores) {
    for (const auto& [surface, concept_id] : snap->reverse_.entries(s)) {
      pst << nlohmann::json{{"type", "reverse"},
                            {"store", std::string(to_string(s))},
                            {"surface", surface},
                            {"concept", concept_id}}
                 .dump()
          << '\n';
    }
  }
  for (std::uint32_t d = 0; d < snap->text_.documents().size(); ++d) {
    const auto& td = snap->text_.documents()[d];
    doc << nlohmann::json{{"doc", d},
                          {"source", td.source_id},
                          {"kind", td.kind},
                          {"date", format_date(td.date)},
                          {"technologies", td.technologies},
                          {"organizations", td.organizations}}
               .dump()
        << '\n';
  }
  snap->dump_ = {ent.str(), edg.str(), pst.str(), doc.str()};
  snap->id_ = "snap-" + sha256_hex(format_date(snap->as_of_) + "\n" + snap->dump_.entities +
                                   snap->dump_.edges + snap->dump_.postings + snap->dump_.documents)
                            .substr(0, 12);
  return snap;
}

SnapshotPtr refresh(const ViewSnapshot& previous, const SourceBundle& delta) {
  SourceBundle merged = previous.sources();
  merged.append(delta);
  return materialize_view(previous.ontology_ptr(), std::move(merged), previous.script());
}

SnapshotPtr SnapshotHolder::current() const {
  std::lock_guard<std::mutex> lock(read_);
  return current_;
}

void SnapshotHolder::publish(SnapshotPtr snapshot) {
  std::lock_guard<std::mutex> lock(read_);
  current_ = std::move(snapshot);
}

}  // namespace techgap
