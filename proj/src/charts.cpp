#include "techgap/charts.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "techgap/error.hpp"

namespace techgap {

namespace {

std::string label_of(const Ontology& onto, const std::string& concept_id) {
  if (auto idx = onto.find(concept_id)) return onto.node(*idx).preferred_label;
  return concept_id;
}

/// Technology concept of a raw source term, if the view maps it.
std::optional<std::string> concept_of(const ViewSnapshot& snapshot, const std::string& term) {
  return snapshot.string_to_concept(StoreKind::Graph, normalize_term(term));
}

}  // namespace

std::string_view to_string(ChartKind kind) noexcept {
  switch (kind) {
    case ChartKind::Spider: return "spider";
    case ChartKind::Timeline: return "timeline";
    case ChartKind::Comparative: return "comparative";
  }
  return "spider";
}

ChartKind parse_chart_kind(std::string_view text) {
  if (text == "spider") return ChartKind::Spider;
  if (text == "timeline") return ChartKind::Timeline;
  if (text == "comparative" || text == "comparative_bars") return ChartKind::Comparative;
  throw Error(ErrorCode::UnknownChartKind, "unknown chart kind '" + std::string(text) + "'");
}

nlohmann::json spider_chart(const ViewSnapshot& snapshot, const Landscape& landscape) {
  const Ontology& onto = snapshot.ontology();
  const RelationMask mask = landscape.provenance.query.relations;
  const std::set<std::string> expansion(landscape.expansion.begin(), landscape.expansion.end());

  std::set<ConceptIndex> seeds;
  for (const auto& term : landscape.provenance.query.pos) {
    for (const auto& c : onto.resolve_term(term)) seeds.insert(onto.index_of(c));
  }
  std::set<std::string> axis_ids;
  for (ConceptIndex s : seeds) {
    bool has_child = false;
    for (Relation r : kAllRelations) {
      if (!mask.contains(r)) continue;
      for (ConceptIndex c : onto.children(s, r)) {
        if (expansion.count(onto.node(c).concept_id)) {
          axis_ids.insert(onto.node(c).concept_id);
          has_child = true;
        }
      }
    }
    if (!has_child && expansion.count(onto.node(s).concept_id)) axis_ids.insert(onto.node(s).concept_id);
  }
  std::vector<std::string> axes(axis_ids.begin(), axis_ids.end());
  std::vector<std::set<ConceptIndex>> covers;
  for (const auto& a : axes) {
    const ConceptIndex idx = onto.index_of(a);
    std::set<ConceptIndex> under;
    for (const auto& [c, d] : onto.descendants_within(std::span(&idx, 1), std::nullopt, mask)) under.insert(c);
    covers.push_back(std::move(under));
  }

  // Per-axis volumes; the trailing slot collects technologies outside every axis.
  std::array<std::vector<double>, kSpiderSources.size()> volume;
  for (auto& v : volume) v.assign(axes.size() + 1, 0.0);
  for (const auto& row : landscape.performance) {
    std::size_t slot = axes.size();
    if (auto idx = onto.find(row.tech)) {
      for (std::size_t a = 0; a < axes.size(); ++a) {
        if (covers[a].count(*idx)) {
          slot = a;
          break;
        }
      }
    }
    volume[0][slot] += row.metrics[0];
    volume[1][slot] += row.metrics[1] + row.metrics[3];
    volume[2][slot] += row.metrics[2];
  }
  const bool other = std::any_of(volume.begin(), volume.end(), [&](const auto& v) { return v.back() != 0.0; });

  nlohmann::json axis_json = nlohmann::json::array();
  for (const auto& a : axes) axis_json.push_back({{"concept", a}, {"label", label_of(onto, a)}});
  if (other) axis_json.push_back({{"concept", "other"}, {"label", "other"}});
  nlohmann::json series = nlohmann::json::array();
  nlohmann::json totals = nlohmann::json::object();
  for (std::size_t s = 0; s < kSpiderSources.size(); ++s) {
    auto values = volume[s];
    if (!other) values.pop_back();
    double total = 0.0;
    for (double v : values) total += v;
    totals[std::string(kSpiderSources[s])] = total;
    if (total == 0.0) continue;
    series.push_back({{"source", kSpiderSources[s]}, {"values", values}, {"total", total}});
  }
  return {{"kind", "spider"},
          {"landscape_id", landscape.landscape_id},
          {"axes", axis_json},
          {"series", series},
          {"totals", totals},
          {"metrics",
           {{"patents", {"patent_count"}},
            {"news", {"publication_count", "news_mentions"}},
            {"funding", {"award_total"}}}}};
}

nlohmann::json timeline_chart(const ViewSnapshot& snapshot, const Landscape& landscape) {
  const Ontology& onto = snapshot.ontology();
  std::set<std::string> techs;
  for (const auto& row : landscape.performance) techs.insert(row.tech);
  const int first = landscape.intervals.empty() ? 0 : landscape.intervals.front();
  const int last = landscape.intervals.empty() ? -1 : landscape.intervals.back();
  auto in_window = [&](Date d) { return year_of(d) >= first && year_of(d) <= last; };

  std::map<std::string, std::vector<nlohmann::json>> events;
  auto concepts_of = [&](const std::vector<std::string>& terms) {
    std::set<std::string> out;
    for (const auto& t : terms) {
      if (auto c = concept_of(snapshot, t); c && techs.count(*c)) out.insert(*c);
    }
    return out;
  };
  const SourceBundle& src = snapshot.sources();
  for (const auto& p : src.patents) {
    if (!in_window(p.grant_date)) continue;
    for (const auto& c : concepts_of(p.terms)) {
      std::vector<std::string> orgs;
      for (const auto& a : p.assignees) orgs.push_back(org_entity_id(a));
      events[c].push_back({{"date", format_date(p.grant_date)},
                           {"type", "patent"},
                           {"source", "patent:" + p.patent_id},
                           {"title", p.title},
                           {"orgs", orgs}});
    }
  }
  for (const auto& f : src.funding) {
    if (!in_window(f.start_date)) continue;
    for (const auto& c : concepts_of(f.terms)) {
      events[c].push_back({{"date", format_date(f.start_date)},
                           {"type", "award"},
                           {"source", "award:" + f.award_id},
                           {"amount", f.amount},
                           {"orgs", {org_entity_id(f.recipient)}}});
    }
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : techs) {
    auto& ev = events[t];
    std::sort(ev.begin(), ev.end(), [](const nlohmann::json& a, const nlohmann::json& b) {
      return std::tie(a["date"].get_ref<const std::string&>(), a["source"].get_ref<const std::string&>()) <
             std::tie(b["date"].get_ref<const std::string&>(), b["source"].get_ref<const std::string&>());
    });
    rows.push_back({{"tech", t}, {"label", label_of(onto, t)}, {"events", ev}});
  }
  nlohmann::json interval = landscape.intervals.empty() ? nlohmann::json(nullptr) : nlohmann::json{first, last};
  return {{"kind", "timeline"}, {"landscape_id", landscape.landscape_id}, {"interval", interval}, {"rows", rows}};
}

nlohmann::json comparative_chart(const ComparativeResult& result, std::string_view landscape_id) {
  auto panel = [](const TechGapSummary& s) {
    nlohmann::json leaders = nlohmann::json::array();
    for (const auto& l : s.leaders) leaders.push_back({{"org", l.org}, {"name", l.name}, {"score", l.score}});
    nlohmann::json competitors = nlohmann::json::array();
    double magnitude = 0.0;
    for (const auto& e : s.gap.results) {
      competitors.push_back({{"org", e.org}, {"name", e.name}, {"distance", e.trace.distance}});
      magnitude = std::max(magnitude, e.trace.distance);
    }
    return nlohmann::json{{"tech", s.tech},
                          {"landscape_id", s.landscape.landscape_id},
                          {"leaders", leaders},
                          {"competitors", competitors},
                          {"gap_magnitude", magnitude}};
  };
  return {{"kind", "comparative"},
          {"landscape_id", landscape_id},
          {"me", result.a.gap.me},
          {"panels", {panel(result.a), panel(result.b)}}};
}

}  // namespace techgap
