#include "techgap/landscape.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "techgap/error.hpp"

namespace techgap {

namespace {

enum MetricSlot : std::size_t { kPatentCount = 0, kPublicationCount = 1, kAwardTotal = 2, kNewsMentions = 3 };

nlohmann::json metrics_json(const KpiMetrics& m) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < kMetricCount; ++i) out[std::string(kMetricNames[i])] = m[i];
  return out;
}

nlohmann::json optional_json(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}

std::optional<std::string> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace

nlohmann::json to_json(const LandscapeParams& params) {
  return {{"roi", to_json(params.roi)}, {"ontology_levels", params.ontology_levels}};
}

LandscapeParams landscape_params_from_json(const nlohmann::json& j) {
  LandscapeParams p;
  if (j.contains("roi")) p.roi = roi_params_from_json(j["roi"]);
  p.ontology_levels = j.value("ontology_levels", p.ontology_levels);
  return p;
}

nlohmann::json to_json(const Provenance& provenance) {
  return {{"query", to_json(provenance.query)},
          {"context", provenance.context},
          {"params", to_json(provenance.params)},
          {"snapshot_id", provenance.snapshot_id}};
}

Provenance provenance_from_json(const nlohmann::json& j) {
  Provenance p;
  p.query = expansion_query_from_json(j.at("query"));
  p.context = j.value("context", std::vector<std::string>{});
  p.params = landscape_params_from_json(j.at("params"));
  p.snapshot_id = j.at("snapshot_id").get<std::string>();
  return p;
}

std::vector<NodeId> Landscape::roi_nodes() const {
  std::vector<NodeId> out;
  for (const auto& r : rois) out.insert(out.end(), r.nodes.begin(), r.nodes.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

nlohmann::json to_json(const Landscape& landscape, const GraphStore& graph) {
  nlohmann::json columns = {"org", "interval", "tech"};
  for (auto m : kMetricNames) columns.push_back(std::string(m));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : landscape.performance) {
    nlohmann::json row = {r.org, r.interval, r.tech};
    for (double v : r.metrics) row.push_back(v);
    rows.push_back(std::move(row));
  }
  nlohmann::json t_edges = nlohmann::json::array();
  for (const auto& e : landscape.tech.edges) {
    t_edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", e.kind}, {"weight", e.weight}});
  }
  nlohmann::json c_edges = nlohmann::json::array();
  for (const auto& e : landscape.partnerships.edges) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& x : e.evidence) {
      ev.push_back({{"kind", x.kind},
                    {"source", x.source},
                    {"date", format_date(x.date)},
                    {"tech_context", optional_json(x.tech_context)}});
    }
    c_edges.push_back({{"a", e.a}, {"b", e.b}, {"evidence", ev}});
  }
  nlohmann::json refs = nlohmann::json::array();
  nlohmann::json rois = nlohmann::json::array();
  for (const auto& r : landscape.rois) {
    refs.push_back(r.roi_id);
    rois.push_back(to_json(r, graph));
  }
  return {{"landscape_id", landscape.landscape_id},
          {"provenance", to_json(landscape.provenance)},
          {"expansion", landscape.expansion},
          {"intervals", landscape.intervals},
          {"roi_refs", refs},
          {"rois", rois},
          {"P", {{"columns", columns}, {"rows", rows}}},
          {"T", {{"nodes", landscape.tech.nodes}, {"edges", t_edges}}},
          {"C", {{"nodes", landscape.partnerships.nodes}, {"edges", c_edges}}}};
}

Landscape landscape_from_json(const nlohmann::json& j, const GraphStore& graph) {
  Landscape l;
  l.landscape_id = j.at("landscape_id").get<std::string>();
  l.provenance = provenance_from_json(j.at("provenance"));
  l.expansion = j.at("expansion").get<std::vector<std::string>>();
  l.intervals = j.at("intervals").get<std::vector<int>>();
  for (const auto& r : j.at("rois")) l.rois.push_back(roi_from_json(r, graph));
  for (const auto& row : j.at("P").at("rows")) {
    PerformanceRow r;
    r.org = row.at(0).get<std::string>();
    r.interval = row.at(1).get<int>();
    r.tech = row.at(2).get<std::string>();
    for (std::size_t i = 0; i < kMetricCount; ++i) r.metrics[i] = row.at(3 + i).get<double>();
    l.performance.push_back(std::move(r));
  }
  l.tech.nodes = j.at("T").at("nodes").get<std::vector<std::string>>();
  for (const auto& e : j.at("T").at("edges")) {
    l.tech.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                            e.at("kind").get<std::string>(), e.at("weight").get<double>()});
  }
  l.partnerships.nodes = j.at("C").at("nodes").get<std::vector<std::string>>();
  for (const auto& e : j.at("C").at("edges")) {
    PartnershipEdge pe{e.at("a").get<std::string>(), e.at("b").get<std::string>(), {}};
    for (const auto& x : e.at("evidence")) {
      auto date = parse_date(x.at("date").get<std::string>());
      if (!date) throw Error(ErrorCode::ParseError, "bad evidence date in landscape bundle");
      pe.evidence.push_back({x.at("kind").get<std::string>(), x.at("source").get<std::string>(), *date,
                             optional_from_json(x.at("tech_context"))});
    }
    l.partnerships.edges.push_back(std::move(pe));
  }
  return l;
}

Landscape construct_landscape(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                              std::vector<RoiSubgraph> rois, const std::set<std::string>& expansion,
                              Provenance provenance) {
  const GraphStore& graph = snapshot.graph();
  const Ontology& onto = snapshot.ontology();
  const RelationMask relations = provenance.query.relations;

  Landscape l;
  l.provenance = std::move(provenance);
  l.landscape_id = "L" + sha256_hex(to_json(l.provenance).dump()).substr(0, 10);
  l.expansion.assign(expansion.begin(), expansion.end());
  l.intervals = index.years();
  l.rois = std::move(rois);
  const std::vector<NodeId> g_nodes = l.roi_nodes();

  // ROI technologies that carry a concept.
  std::map<std::string, std::string> roi_tech;
  std::set<std::string> roi_concepts;
  std::set<std::string> candidates;
  for (NodeId n : g_nodes) {
    const auto& node = graph.node(n);
    if (node.kind == EntityKind::Technology) {
      if (auto c = snapshot.string_to_concept(StoreKind::Graph, node.entity_id.substr(5))) {
        roi_tech.emplace(node.entity_id, *c);
        roi_concepts.insert(*c);
      }
    } else if (node.kind == EntityKind::Organization) {
      candidates.insert(node.entity_id);
    }
  }
  if (!index.empty()) {
    // Organizations one hop outside G.
    for (NodeId n : g_nodes) {
      for (NodeId m : index.latest().graph.neighbors(n)) {
        if (graph.node(m).kind == EntityKind::Organization) candidates.insert(graph.node(m).entity_id);
      }
    }
  }

  auto roi_concepts_of = [&](const std::vector<std::string>& tech_ids) {
    std::set<std::string> out;
    for (const auto& t : tech_ids) {
      if (auto it = roi_tech.find(t); it != roi_tech.end()) out.insert(it->second);
    }
    return out;
  };
  std::map<std::tuple<std::string, int, std::string>, KpiMetrics> perf;
  auto attribute = [&](const std::vector<std::string>& orgs, const std::vector<std::string>& techs,
                       Date date, std::size_t metric, double amount) {
    const auto concepts = roi_concepts_of(techs);
    if (concepts.empty()) return;
    const std::set<std::string> unique_orgs(orgs.begin(), orgs.end());
    for (const auto& o : unique_orgs) {
      if (!candidates.count(o)) continue;
      for (const auto& c : concepts) perf[{o, year_of(date), c}][metric] += amount;
    }
  };
  auto tech_ids = [](const std::vector<std::string>& terms) {
    std::vector<std::string> out;
    for (const auto& t : terms) out.push_back(tech_entity_id(t));
    return out;
  };

  const SourceBundle& src = snapshot.sources();
  std::map<std::string, std::vector<std::string>> record_techs;
  for (const auto& p : src.patents) {
    std::vector<std::string> orgs;
    for (const auto& a : p.assignees) orgs.push_back(org_entity_id(a));
    auto techs = tech_ids(p.terms);
    attribute(orgs, techs, p.grant_date, kPatentCount, 1.0);
    record_techs["patent:" + p.patent_id] = std::move(techs);
  }
  std::vector<std::pair<const NewsDocument*, std::vector<std::string>>> publications;
  for (const auto& d : src.news) {
    std::vector<std::string> orgs, techs;
    for (const auto& m : d.mentions) {
      if (m.kind == MentionKind::Organization) {
        orgs.push_back(org_entity_id(m.surface));
      } else {
        techs.push_back(tech_entity_id(m.surface));
      }
    }
    const bool publication = d.kind == DocumentKind::Publication;
    attribute(orgs, techs, d.publish_date, publication ? kPublicationCount : kNewsMentions, 1.0);
    if (publication) publications.emplace_back(&d, std::move(orgs));
    record_techs["doc:" + d.doc_id] = std::move(techs);
  }
  for (const auto& f : src.funding) {
    attribute({org_entity_id(f.recipient)}, tech_ids(f.terms), f.start_date, kAwardTotal, f.amount);
  }

  std::set<std::string> orgs;
  for (const auto& [key, metrics] : perf) {
    const auto& [org, year, tech] = key;
    orgs.insert(org);
    l.performance.push_back({org, year, tech, metrics});
  }

  // T: ROI concepts with ontology ancestors, or the bare expansion when no
  // region was found.
  std::set<std::string> t_nodes;
  if (l.rois.empty()) {
    t_nodes = expansion;
  } else {
    t_nodes = roi_concepts;
    std::set<ConceptIndex> frontier;
    for (const auto& c : roi_concepts) frontier.insert(onto.index_of(c));
    for (unsigned level = 0; level < l.provenance.params.ontology_levels; ++level) {
      std::set<ConceptIndex> next;
      for (ConceptIndex c : frontier) {
        for (Relation r : kAllRelations) {
          if (!relations.contains(r)) continue;
          for (ConceptIndex p : onto.parents(c, r)) {
            if (t_nodes.insert(onto.node(p).concept_id).second) next.insert(p);
          }
        }
      }
      frontier = std::move(next);
    }
  }
  l.tech.nodes.assign(t_nodes.begin(), t_nodes.end());
  for (const auto& e : onto.edges()) {
    if (!relations.contains(e.relation)) continue;
    if (t_nodes.count(e.parent) && t_nodes.count(e.child)) {
      l.tech.edges.push_back({e.parent, e.child, std::string(to_string(e.relation)), 1.0});
    }
  }
  std::map<std::pair<std::string, std::string>, double> cooc;
  std::set<std::size_t> g_edges;
  for (const auto& r : l.rois) g_edges.insert(r.edges.begin(), r.edges.end());
  for (std::size_t i : g_edges) {
    const auto& e = graph.edges()[i];
    if (e.kind != EdgeKind::CoOccurrence) continue;
    auto a = roi_tech.find(graph.node(e.src).entity_id);
    auto b = roi_tech.find(graph.node(e.dst).entity_id);
    if (a == roi_tech.end() || b == roi_tech.end() || a->second == b->second) continue;
    cooc[std::minmax(a->second, b->second)] += e.weight;
  }
  for (const auto& [pair, w] : cooc) l.tech.edges.push_back({pair.first, pair.second, "coOccurrence", w});
  std::sort(l.tech.edges.begin(), l.tech.edges.end(), [](const TechEdge& x, const TechEdge& y) {
    return std::tie(x.kind, x.from, x.to) < std::tie(y.kind, y.from, y.to);
  });

  // C: cooperative evidence between landscape organizations.
  std::map<std::pair<std::string, std::string>, std::set<Evidence>> evidence;
  auto context_of = [&](const std::string& record) -> std::optional<std::string> {
    auto it = record_techs.find(record);
    if (it == record_techs.end()) return std::nullopt;
    auto concepts = roi_concepts_of(it->second);
    if (concepts.empty()) return std::nullopt;
    return *concepts.begin();
  };
  for (const auto& e : graph.edges()) {
    if (e.kind != EdgeKind::CoOwnership && e.kind != EdgeKind::Partnership) continue;
    const auto& a = graph.node(e.src).entity_id;
    const auto& b = graph.node(e.dst).entity_id;
    if (!orgs.count(a) || !orgs.count(b)) continue;
    if (e.kind == EdgeKind::CoOwnership) {
      evidence[std::minmax(a, b)].insert({"jointPatent", e.origin, e.timestamp, context_of(e.origin)});
    } else {
      evidence[std::minmax(a, b)].insert({"declaredPartnership", e.origin, e.timestamp, std::nullopt});
    }
  }
  for (const auto& [doc, doc_orgs] : publications) {
    std::set<std::string> members;
    for (const auto& o : doc_orgs) {
      if (orgs.count(o)) members.insert(o);
    }
    const std::string source = "doc:" + doc->doc_id;
    for (auto i = members.begin(); i != members.end(); ++i) {
      for (auto j = std::next(i); j != members.end(); ++j) {
        evidence[{*i, *j}].insert({"coAuthorship", source, doc->publish_date, context_of(source)});
      }
    }
  }
  l.partnerships.nodes.assign(orgs.begin(), orgs.end());
  for (const auto& [pair, ev] : evidence) {
    l.partnerships.edges.push_back({pair.first, pair.second, {ev.begin(), ev.end()}});
  }
  return l;
}

Landscape run_landscape(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                        const ExpansionQuery& query, const LandscapeParams& params,
                        const std::vector<std::string>& context) {
  if (!(index.mask() == params.roi.mask)) {
    return run_landscape(snapshot, build_temporal_index(snapshot, params.roi.mask), query, params,
                         context);
  }
  const Ontology& onto = snapshot.ontology();
  std::set<std::string> expansion = onto.expand_query(query);
  if (!context.empty()) {
    ExpansionQuery cq;
    cq.pos = context;
    cq.max_depth = query.max_depth;
    cq.relations = query.relations;
    const std::set<std::string> bound = onto.expand_query(cq);
    std::erase_if(expansion, [&](const std::string& c) { return !bound.count(c); });
    if (expansion.empty()) {
      throw Error(ErrorCode::EmptyExpansion, "the expansion shares no concept with the context terms");
    }
  }
  const std::vector<NodeId> seeds = snapshot.concepts_to_instances(expansion);
  auto rois = detect_densifying_regions(snapshot.graph(), index, seeds, params.roi);
  Provenance provenance{query, context, params, snapshot.id()};
  return construct_landscape(snapshot, index, std::move(rois), expansion, std::move(provenance));
}

Landscape run_landscape(const ViewSnapshot& snapshot, const ExpansionQuery& query,
                        const LandscapeParams& params) {
  return run_landscape(snapshot, build_temporal_index(snapshot, params.roi.mask), query, params);
}

std::vector<CubeRow> kpi_cube(const Landscape& landscape, const std::vector<std::string>& dims) {
  bool by_org = false, by_interval = false, by_tech = false;
  for (const auto& d : dims) {
    if (d == "org") {
      by_org = true;
    } else if (d == "interval") {
      by_interval = true;
    } else if (d == "tech") {
      by_tech = true;
    } else {
      throw Error(ErrorCode::UnknownDimension, "unknown cube dimension '" + d + "'");
    }
  }
  using Key = std::tuple<std::optional<std::string>, std::optional<int>, std::optional<std::string>>;
  std::map<Key, KpiMetrics> groups;
  if (!by_org && !by_interval && !by_tech) groups[{}];  // grand total row even for empty P
  for (const auto& r : landscape.performance) {
    Key key{by_org ? std::optional(r.org) : std::nullopt,
            by_interval ? std::optional(r.interval) : std::nullopt,
            by_tech ? std::optional(r.tech) : std::nullopt};
    auto& m = groups[key];
    for (std::size_t i = 0; i < kMetricCount; ++i) m[i] += r.metrics[i];
  }
  std::vector<CubeRow> out;
  for (const auto& [key, m] : groups) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), m});
  }
  return out;
}

nlohmann::json to_json(const std::vector<CubeRow>& cube, const std::vector<std::string>& dims) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : cube) {
    nlohmann::json row = nlohmann::json::object();
    if (r.org) row["org"] = *r.org;
    if (r.interval) row["interval"] = *r.interval;
    if (r.tech) row["tech"] = *r.tech;
    row["metrics"] = metrics_json(r.metrics);
    rows.push_back(std::move(row));
  }
  return {{"dims", dims}, {"rows", rows}};
}

}  // namespace techgap
