#include "techgap/gap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "techgap/error.hpp"
#include "toml.hpp"

namespace techgap {

namespace {

constexpr std::array<std::pair<std::string_view, Comparator>, 8> kComparatorSpellings{{
    {"<", Comparator::Lt},
    {"<=", Comparator::Le},
    {"≤", Comparator::Le},
    {"=", Comparator::Eq},
    {"==", Comparator::Eq},
    {">=", Comparator::Ge},
    {"≥", Comparator::Ge},
    {">", Comparator::Gt},
}};

bool is_numeric(Comparator op) {
  return op == Comparator::Lt || op == Comparator::Le || op == Comparator::Ge || op == Comparator::Gt;
}

bool is_clique_field(std::string_view field) {
  return std::find(kCliqueFields.begin(), kCliqueFields.end(), field) != kCliqueFields.end();
}

/// Type checks shared by the TOML and JSON readers.
Predicate make_predicate(std::string field, std::string_view op_text, Scalar value, bool clique) {
  if (field.empty()) throw Error(ErrorCode::InvalidArgument, "rule needs a field");
  auto op = parse_comparator(op_text);
  if (!op) throw Error(ErrorCode::InvalidArgument, "unknown comparator '" + std::string(op_text) + "'");
  if (clique && !is_clique_field(field)) {
    throw Error(ErrorCode::InvalidArgument, "unknown clique field '" + field + "'");
  }
  if (is_numeric(*op) && !std::holds_alternative<double>(value)) {
    throw Error(ErrorCode::InvalidArgument, "comparator " + std::string(op_text) + " on '" + field +
                                                "' needs a numeric value");
  }
  if (*op == Comparator::Contains && !std::holds_alternative<std::string>(value)) {
    throw Error(ErrorCode::InvalidArgument, "contains on '" + field + "' needs a string value");
  }
  if (clique && std::holds_alternative<std::string>(value)) {
    throw Error(ErrorCode::InvalidArgument, "clique field '" + field + "' is numeric");
  }
  return {std::move(field), *op, std::move(value)};
}

std::vector<Predicate> rules_from_toml(const toml::table& tbl, std::string_view key, bool clique) {
  std::vector<Predicate> out;
  const auto* arr = tbl[key].as_array();
  if (!arr) {
    if (tbl.contains(key)) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be [[" + std::string(key) + "]]");
    return out;
  }
  for (const auto& node : *arr) {
    const auto* t = node.as_table();
    if (!t) throw Error(ErrorCode::InvalidArgument, std::string(key) + " rules must be tables");
    const auto field = (*t)["field"].value_or(std::string{});
    const auto op = (*t)["op"].value_or(std::string{});
    const auto& v = (*t)["value"];
    Scalar value;
    if (auto d = v.value<double>()) {
      value = *d;
    } else if (auto s = v.value<std::string>()) {
      value = *s;
    } else {
      throw Error(ErrorCode::InvalidArgument, "rule on '" + field + "' needs a number or string value");
    }
    out.push_back(make_predicate(field, op, std::move(value), clique));
  }
  return out;
}

std::vector<Predicate> rules_from_json(const nlohmann::json& j, const char* key, bool clique) {
  std::vector<Predicate> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be an array");
  for (const auto& r : arr) {
    if (!r.is_object() || !r.contains("value")) {
      throw Error(ErrorCode::InvalidArgument, std::string(key) + " rules need field, op and value");
    }
    const auto& v = r.at("value");
    if (!v.is_number() && !v.is_string()) {
      throw Error(ErrorCode::InvalidArgument, "rule values must be numbers or strings");
    }
    out.push_back(make_predicate(r.value("field", std::string{}), r.value("op", std::string{}),
                                 scalar_from_json(v), clique));
  }
  return out;
}

nlohmann::json kpi_json(const KpiVector& v) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < v.size() && i < kMetricCount; ++i) out[std::string(kMetricNames[i])] = v[i];
  return out;
}

nlohmann::json clique_json(const QuasiCliqueInfo& c, Date as_of) {
  nlohmann::json j = {{"nodes", c.nodes},
                      {"technologies", c.technologies},
                      {"organizations", c.organizations},
                      {"gamma", c.gamma}};
  if (c.newest_activity == Date{}) {
    j["newest_activity"] = nullptr;
    j["newest_activity_age_days"] = nullptr;
  } else {
    j["newest_activity"] = format_date(c.newest_activity);
    j["newest_activity_age_days"] = (as_of - c.newest_activity).count();
  }
  return j;
}

std::string org_name(const ViewSnapshot& snapshot, const std::string& org) {
  if (const auto* rec = snapshot.table().find(org)) {
    if (auto it = rec->properties.find("name"); it != rec->properties.end()) {
      if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    }
  }
  return org;
}

KpiVector zero_kpis() { return KpiVector(kMetricCount, 0.0); }

KpiVector kpi_maxima(const std::map<std::string, KpiVector>& kpis) {
  KpiVector out = zero_kpis();
  for (const auto& [org, v] : kpis) {
    for (std::size_t i = 0; i < kMetricCount; ++i) out[i] = std::max(out[i], v[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Comparator op) noexcept {
  switch (op) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Eq: return "=";
    case Comparator::Ge: return ">=";
    case Comparator::Gt: return ">";
    case Comparator::Contains: return "contains";
  }
  return "=";
}

std::optional<Comparator> parse_comparator(std::string_view text) noexcept {
  for (const auto& [spelling, op] : kComparatorSpellings) {
    if (text == spelling) return op;
  }
  if (text == "contains") return Comparator::Contains;
  return std::nullopt;
}

nlohmann::json to_json(const Predicate& p) {
  return {{"field", p.field}, {"op", std::string(to_string(p.op))}, {"value", to_json(p.value)}};
}

bool evaluate(const Predicate& p, const std::optional<Scalar>& actual) {
  if (!actual) return false;
  if (p.op == Comparator::Contains) {
    const auto* have = std::get_if<std::string>(&*actual);
    const auto* want = std::get_if<std::string>(&p.value);
    if (!have || !want) return false;
    return normalize_term(*have).find(normalize_term(*want)) != std::string::npos;
  }
  if (actual->index() != p.value.index()) return false;
  if (const auto* s = std::get_if<std::string>(&*actual)) {
    return p.op == Comparator::Eq && normalize_term(*s) == normalize_term(std::get<std::string>(p.value));
  }
  const double a = std::get<double>(*actual);
  const double b = std::get<double>(p.value);
  switch (p.op) {
    case Comparator::Lt: return a < b;
    case Comparator::Le: return a <= b;
    case Comparator::Eq: return a == b;
    case Comparator::Ge: return a >= b;
    case Comparator::Gt: return a > b;
    case Comparator::Contains: break;
  }
  return false;
}

ConditionSet ConditionSet::parse_toml(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("condition set: ") + std::string(e.description()));
  }
  ConditionSet c;
  c.org_rules = rules_from_toml(tbl, "org", false);
  c.clique_rules = rules_from_toml(tbl, "clique", true);
  return c;
}

ConditionSet ConditionSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open condition set " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

ConditionSet ConditionSet::from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "cond must be an object");
  ConditionSet c;
  c.org_rules = rules_from_json(j, "org", false);
  c.clique_rules = rules_from_json(j, "clique", true);
  return c;
}

nlohmann::json ConditionSet::to_json() const {
  nlohmann::json org = nlohmann::json::array();
  for (const auto& p : org_rules) org.push_back(techgap::to_json(p));
  nlohmann::json clique = nlohmann::json::array();
  for (const auto& p : clique_rules) clique.push_back(techgap::to_json(p));
  return {{"org", org}, {"clique", clique}};
}

nlohmann::json to_json(const RuleCheck& check) {
  nlohmann::json j = to_json(check.predicate);
  if (check.clique) j["clique"] = *check.clique;
  j["actual"] = check.actual ? to_json(*check.actual) : nlohmann::json(nullptr);
  j["passed"] = check.passed;
  return j;
}

bool o_rule(const EntityRecord& org, std::span<const Predicate> rules, std::vector<RuleCheck>* trace) {
  bool all = true;
  for (const auto& p : rules) {
    std::optional<Scalar> actual;
    if (auto it = org.properties.find(p.field); it != org.properties.end()) actual = it->second;
    const bool ok = evaluate(p, actual);
    all = all && ok;
    if (trace) trace->push_back({std::nullopt, p, std::move(actual), ok});
  }
  return all;
}

std::optional<Scalar> clique_aggregate(const QuasiCliqueInfo& clique, std::string_view field, Date as_of) {
  if (field == "member_count") return static_cast<double>(clique.nodes.size());
  if (field == "tech_count") return static_cast<double>(clique.technologies.size());
  if (field == "org_count") return static_cast<double>(clique.organizations.size());
  if (clique.newest_activity == Date{}) return std::nullopt;
  const double days = static_cast<double>((as_of - clique.newest_activity).count());
  if (field == "newest_activity_age_days") return days;
  if (field == "newest_activity_age_years") return days / 365.0;
  return std::nullopt;
}

std::vector<std::size_t> t_rule(std::span<const QuasiCliqueInfo> cliques,
                                std::span<const std::size_t> candidates,
                                std::span<const Predicate> rules, Date as_of,
                                std::vector<RuleCheck>* trace) {
  std::vector<std::size_t> kept;
  for (std::size_t c : candidates) {
    bool all = true;
    for (const auto& p : rules) {
      auto actual = clique_aggregate(cliques[c], p.field, as_of);
      const bool ok = evaluate(p, actual);
      all = all && ok;
      if (trace) trace->push_back({c, p, std::move(actual), ok});
    }
    if (all) kept.push_back(c);
  }
  return kept;
}

double kpi_distance(const KpiVector& a, const KpiVector& b, const KpiVector& maxima) {
  if (a.size() != b.size() || a.size() != maxima.size()) {
    throw Error(ErrorCode::DimensionMismatch, "KPI vectors of dimension " + std::to_string(a.size()) +
                                                  " and " + std::to_string(b.size()) +
                                                  " over " + std::to_string(maxima.size()) + " maxima");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (maxima[i] <= 0.0) continue;
    const double d = (a[i] - b[i]) / maxima[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double theta_from_json(const nlohmann::json& j) {
  double theta = 0.0;
  if (j.is_number()) {
    theta = j.get<double>();
  } else if (j.is_string()) {
    const auto s = normalize_term(j.get<std::string>());
    if (s != "inf" && s != "infinity" && s != "+inf") {
      throw Error(ErrorCode::InvalidArgument, "theta must be a number or \"inf\"");
    }
    theta = std::numeric_limits<double>::infinity();
  } else {
    throw Error(ErrorCode::InvalidArgument, "theta must be a number or \"inf\"");
  }
  if (!(theta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be nonnegative");
  return theta;
}

nlohmann::json theta_to_json(double theta) {
  if (std::isinf(theta)) return "inf";
  return theta;
}

nlohmann::json to_json(const GapQuery& query) {
  return {{"landscape_id", query.landscape_id}, {"me", query.me},
          {"theta", theta_to_json(query.theta)}, {"cond", query.cond.to_json()},
          {"ego_radius", query.ego_radius},     {"gamma", query.gamma},
          {"min_size", query.min_size},         {"max_branches", query.max_branches}};
}

GapQuery gap_query_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "gap query must be an object");
  GapQuery q;
  q.landscape_id = j.value("landscape_id", std::string{});
  q.me = j.value("me", std::string{});
  if (j.contains("theta")) q.theta = theta_from_json(j["theta"]);
  if (j.contains("cond")) q.cond = ConditionSet::from_json(j["cond"]);
  q.ego_radius = j.value("ego_radius", q.ego_radius);
  q.gamma = j.value("gamma", q.gamma);
  q.min_size = j.value("min_size", q.min_size);
  q.max_branches = j.value("max_branches", q.max_branches);
  if (!(q.gamma > 0.0 && q.gamma <= 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  return q;
}

nlohmann::json to_json(const GapTrace& trace) {
  nlohmann::json org = nlohmann::json::array();
  for (const auto& c : trace.org_checks) org.push_back(to_json(c));
  nlohmann::json clique = nlohmann::json::array();
  for (const auto& c : trace.clique_checks) clique.push_back(to_json(c));
  return {{"participates", trace.participates},
          {"cliques", trace.cliques},
          {"org_rules", org},
          {"clique_rules", clique},
          {"kept_cliques", trace.kept},
          {"distance", trace.distance},
          {"theta", theta_to_json(trace.theta)},
          {"included", trace.included}};
}

bool replay(const GapTrace& trace) {
  const bool org_ok = std::all_of(trace.org_checks.begin(), trace.org_checks.end(),
                                  [](const RuleCheck& c) { return c.passed; });
  bool any_kept = false;
  for (std::size_t c : trace.cliques) {
    bool ok = true;
    for (const auto& check : trace.clique_checks) {
      if (check.clique == c && !check.passed) ok = false;
    }
    any_kept = any_kept || ok;
  }
  return trace.participates && org_ok && any_kept && trace.distance > trace.theta;
}

nlohmann::json to_json(const GapResult& result) {
  nlohmann::json cliques = nlohmann::json::array();
  for (const auto& c : result.cliques) cliques.push_back(clique_json(c, result.as_of));
  auto entry_json = [&](const GapEntry& e) {
    nlohmann::json kept = nlohmann::json::array();
    for (std::size_t c : e.trace.kept) {
      nlohmann::json cj = clique_json(result.cliques[c], result.as_of);
      cj["index"] = c;
      kept.push_back(std::move(cj));
    }
    return nlohmann::json{{"org", e.org},
                          {"name", e.name},
                          {"kpis", kpi_json(e.kpis)},
                          {"distance", e.trace.distance},
                          {"cliques", kept},
                          {"trace", to_json(e.trace)}};
  };
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : result.results) results.push_back(entry_json(e));
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : result.excluded) excluded.push_back(entry_json(e));
  return {{"query", to_json(result.query)},
          {"landscape_id", result.landscape_id},
          {"as_of", format_date(result.as_of)},
          {"window", result.window},
          {"ego", result.ego},
          {"me", {{"org", result.me}, {"kpis", kpi_json(result.me_kpis)}}},
          {"maxima", kpi_json(result.maxima)},
          {"cliques", cliques},
          {"results", results},
          {"excluded", excluded}};
}

std::map<std::string, KpiVector> kpi_vectors(const Landscape& landscape, unsigned history) {
  std::set<int> window;
  const auto& iv = landscape.intervals;
  const std::size_t from = iv.size() > history ? iv.size() - history : 0;
  window.insert(iv.begin() + static_cast<std::ptrdiff_t>(from), iv.end());
  std::map<std::string, KpiVector> out;
  for (const auto& org : landscape.organizations()) out.emplace(org, zero_kpis());
  for (const auto& row : landscape.performance) {
    if (!window.count(row.interval)) continue;
    auto& v = out.try_emplace(row.org, zero_kpis()).first->second;
    for (std::size_t i = 0; i < kMetricCount; ++i) v[i] += row.metrics[i];
  }
  return out;
}

std::string resolve_organization(const ViewSnapshot& snapshot, std::string_view org) {
  auto is_org = [&](const std::string& id) {
    const auto* rec = snapshot.table().find(id);
    return rec && rec->kind == EntityKind::Organization;
  };
  if (org.starts_with("org:") && is_org(std::string(org))) return std::string(org);
  const std::string id = org_entity_id(org);
  if (is_org(id)) return id;
  throw Error(ErrorCode::UnknownOrganization, "unknown organization '" + std::string(org) + "'");
}

GapResult run_gap(const ViewSnapshot& snapshot, const Landscape& landscape, const GapQuery& query) {
  if (!query.landscape_id.empty() && query.landscape_id != landscape.landscape_id) {
    throw Error(ErrorCode::UnknownLandscape, "unknown landscape '" + query.landscape_id + "'");
  }
  if (!(query.theta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be nonnegative");
  const GraphStore& graph = snapshot.graph();

  GapResult r;
  r.query = query;
  r.landscape_id = landscape.landscape_id;
  r.as_of = snapshot.as_of();
  r.me = resolve_organization(snapshot, query.me);

  // Ego network over the partnership graph C.
  const auto& c_nodes = landscape.partnerships.nodes;
  auto c_pos = std::lower_bound(c_nodes.begin(), c_nodes.end(), r.me);
  if (c_pos == c_nodes.end() || *c_pos != r.me) {
    r.ego = {r.me};
  } else {
    std::unordered_map<std::string, NodeId> c_index;
    for (std::size_t i = 0; i < c_nodes.size(); ++i) c_index.emplace(c_nodes[i], static_cast<NodeId>(i));
    UndirectedGraph c_graph(c_nodes.size());
    for (const auto& e : landscape.partnerships.edges) c_graph.add_edge(c_index.at(e.a), c_index.at(e.b));
    for (NodeId n : ego_network(c_graph, c_index.at(r.me), query.ego_radius)) r.ego.push_back(c_nodes[n]);
  }
  const std::set<std::string> ego(r.ego.begin(), r.ego.end());

  // G as a compact graph over the ROI nodes and edges.
  const std::vector<NodeId> g_nodes = landscape.roi_nodes();
  std::unordered_map<NodeId, NodeId> local;
  for (std::size_t i = 0; i < g_nodes.size(); ++i) local.emplace(g_nodes[i], static_cast<NodeId>(i));
  std::set<std::size_t> g_edges;
  for (const auto& roi : landscape.rois) g_edges.insert(roi.edges.begin(), roi.edges.end());
  UndirectedGraph g(g_nodes.size());
  for (std::size_t i : g_edges) {
    const auto& e = graph.edges()[i];
    g.add_edge(local.at(e.src), local.at(e.dst));
  }
  for (const auto& members : quasi_cliques(g, query.gamma, query.min_size, query.max_branches)) {
    QuasiCliqueInfo info;
    info.gamma = query.gamma;
    std::set<NodeId> global;
    for (NodeId m : members) {
      const NodeId n = g_nodes[m];
      global.insert(n);
      const auto& node = graph.node(n);
      info.nodes.push_back(node.entity_id);
      if (node.kind == EntityKind::Technology) info.technologies.push_back(node.entity_id);
      if (node.kind == EntityKind::Organization) info.organizations.push_back(node.entity_id);
    }
    for (std::size_t i : g_edges) {
      const auto& e = graph.edges()[i];
      if (global.count(e.src) && global.count(e.dst)) info.newest_activity = std::max(info.newest_activity, e.timestamp);
    }
    std::sort(info.nodes.begin(), info.nodes.end());
    std::sort(info.technologies.begin(), info.technologies.end());
    std::sort(info.organizations.begin(), info.organizations.end());
    r.cliques.push_back(std::move(info));
  }

  // worksOn targets per organization, for clique participation.
  std::map<std::string, std::set<std::string>> works_on;
  for (const auto& e : graph.edges()) {
    if (e.kind != EdgeKind::WorksOn) continue;
    works_on[graph.node(e.src).entity_id].insert(graph.node(e.dst).entity_id);
  }

  const unsigned history = landscape.provenance.params.roi.history;
  const auto& iv = landscape.intervals;
  r.window.assign(iv.begin() + static_cast<std::ptrdiff_t>(iv.size() > history ? iv.size() - history : 0),
                  iv.end());
  const auto kpis = kpi_vectors(landscape, history);
  r.maxima = kpi_maxima(kpis);
  auto kpis_of = [&](const std::string& org) {
    auto it = kpis.find(org);
    return it == kpis.end() ? zero_kpis() : it->second;
  };
  r.me_kpis = kpis_of(r.me);

  // comp: landscape organizations inside G but outside the ego network.
  std::vector<std::string> comp;
  for (NodeId n : g_nodes) {
    const auto& node = graph.node(n);
    if (node.kind != EntityKind::Organization || ego.count(node.entity_id)) continue;
    if (std::binary_search(c_nodes.begin(), c_nodes.end(), node.entity_id)) comp.push_back(node.entity_id);
  }
  std::sort(comp.begin(), comp.end());

  static const EntityRecord kNoRecord{};
  for (const auto& org : comp) {
    GapEntry entry;
    entry.org = org;
    entry.name = org_name(snapshot, org);
    entry.kpis = kpis_of(org);
    GapTrace& t = entry.trace;
    t.theta = query.theta;
    const auto works = works_on.find(org);
    for (std::size_t c = 0; c < r.cliques.size(); ++c) {
      const auto& info = r.cliques[c];
      bool member = std::binary_search(info.organizations.begin(), info.organizations.end(), org);
      if (!member && works != works_on.end()) {
        std::size_t hits = 0;
        for (const auto& tech : info.technologies) hits += works->second.count(tech);
        member = hits >= 2;
      }
      if (member) t.cliques.push_back(c);
    }
    t.participates = !t.cliques.empty();
    t.distance = kpi_distance(entry.kpis, r.me_kpis, r.maxima);
    if (!t.participates) {
      r.excluded.push_back(std::move(entry));
      continue;
    }
    const EntityRecord* rec = snapshot.table().find(org);
    const bool org_ok = o_rule(rec ? *rec : kNoRecord, query.cond.org_rules, &t.org_checks);
    t.kept = t_rule(r.cliques, t.cliques, query.cond.clique_rules, r.as_of, &t.clique_checks);
    t.included = org_ok && !t.kept.empty() && t.distance > query.theta;
    (t.included ? r.results : r.excluded).push_back(std::move(entry));
  }
  std::stable_sort(r.results.begin(), r.results.end(), [](const GapEntry& a, const GapEntry& b) {
    if (a.trace.distance != b.trace.distance) return a.trace.distance > b.trace.distance;
    return a.org < b.org;
  });
  return r;
}

nlohmann::json to_json(const ComparativeQuery& query) {
  return {{"me", query.me},
          {"tech_a", query.tech_a},
          {"tech_b", query.tech_b},
          {"context", query.context},
          {"max_depth", query.max_depth ? nlohmann::json(*query.max_depth) : nlohmann::json(nullptr)},
          {"params", to_json(query.params)},
          {"gap", to_json(query.gap)}};
}

ComparativeQuery comparative_query_from_json(const nlohmann::json& j, const LandscapeParams& defaults,
                                             const GapQuery& gap_defaults) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "comparative query must be an object");
  ComparativeQuery q;
  q.params = defaults;
  q.gap = gap_defaults;
  q.me = j.value("me", std::string{});
  q.tech_a = j.value("tech_a", std::string{});
  q.tech_b = j.value("tech_b", std::string{});
  if (q.me.empty() || q.tech_a.empty() || q.tech_b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "me, tech_a and tech_b are required");
  }
  q.context = j.value("context", std::vector<std::string>{});
  if (j.contains("max_depth")) {
    q.max_depth = j["max_depth"].is_null() ? std::nullopt : std::optional<unsigned>(j["max_depth"].get<unsigned>());
  }
  if (j.contains("params")) q.params = landscape_params_from_json(j["params"]);
  if (j.contains("theta")) q.gap.theta = theta_from_json(j["theta"]);
  if (j.contains("cond")) q.gap.cond = ConditionSet::from_json(j["cond"]);
  if (j.contains("gamma")) q.gap.gamma = j["gamma"].get<double>();
  if (j.contains("ego_radius")) q.gap.ego_radius = j["ego_radius"].get<unsigned>();
  q.gap.me = q.me;
  q.gap.landscape_id.clear();
  return q;
}

nlohmann::json to_json(const TechGapSummary& summary) {
  nlohmann::json leaders = nlohmann::json::array();
  for (const auto& l : summary.leaders) {
    leaders.push_back({{"org", l.org}, {"name", l.name}, {"score", l.score}, {"kpis", kpi_json(l.kpis)}});
  }
  double magnitude = 0.0;
  for (const auto& e : summary.gap.results) magnitude = std::max(magnitude, e.trace.distance);
  return {{"tech", summary.tech},
          {"landscape_id", summary.landscape.landscape_id},
          {"expansion", summary.landscape.expansion},
          {"roi_count", summary.landscape.rois.size()},
          {"leaders", leaders},
          {"gap_magnitude", magnitude},
          {"gap", to_json(summary.gap)}};
}

nlohmann::json to_json(const ComparativeResult& result) {
  return {{"query", to_json(result.query)}, {"a", to_json(result.a)}, {"b", to_json(result.b)}};
}

ComparativeResult comparative_gap(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                                  const ComparativeQuery& query) {
  ComparativeResult out;
  out.query = query;
  auto summarize = [&](const std::string& tech) {
    TechGapSummary s;
    s.tech = tech;
    ExpansionQuery eq;
    eq.pos = {tech};
    eq.max_depth = query.max_depth;
    s.landscape = run_landscape(snapshot, index, eq, query.params, query.context);
    const auto kpis = kpi_vectors(s.landscape, query.params.roi.history);
    const KpiVector maxima = kpi_maxima(kpis);
    for (const auto& [org, v] : kpis) {
      Leader l{org, org_name(snapshot, org), 0.0, v};
      for (std::size_t i = 0; i < kMetricCount; ++i) {
        if (maxima[i] > 0.0) l.score += v[i] / maxima[i];
      }
      s.leaders.push_back(std::move(l));
    }
    std::stable_sort(s.leaders.begin(), s.leaders.end(), [](const Leader& a, const Leader& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.org < b.org;
    });
    GapQuery gq = query.gap;
    gq.me = query.me;
    gq.landscape_id = s.landscape.landscape_id;
    s.gap = run_gap(snapshot, s.landscape, gq);
    return s;
  };
  out.a = summarize(query.tech_a);
  out.b = query.tech_b == query.tech_a ? out.a : summarize(query.tech_b);
  return out;
}

}  // namespace techgap
