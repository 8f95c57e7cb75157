#include "techgap/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "techgap/data_model.hpp"
#include "techgap/error.hpp"
#include "toml.hpp"

namespace techgap {

namespace {

constexpr std::array<const char*, 4> kMetrics{"patent_count", "publication_count", "award_total",
                                              "news_mentions"};
enum Metric : std::size_t { kPatents = 0, kPublications = 1, kAwards = 2, kNews = 3 };

constexpr std::array<const char*, 4> kRadarGroups{"signal processing", "antenna", "waveform",
                                                  "tracking"};
constexpr std::array<const char*, 16> kOrgStems{
    "Aldermoor", "Brightwater", "Castellan", "Dunmore", "Everline", "Fairhaven",
    "Glenrock",  "Highmark",    "Ironvale",  "Juniper", "Kestrel",  "Larkspur",
    "Marlow",    "Northgate",   "Oakridge",  "Pinecrest"};

std::string slug(std::string_view label) {
  std::string out = "c:";
  for (char c : normalize_term(label)) out += (c == ' ') ? '-' : c;
  return out;
}

std::string two_digits(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

std::string_view role_name(GapRole r) {
  switch (r) {
    case GapRole::Me: return "me";
    case GapRole::Partner: return "partner";
    case GapRole::Competitor: return "competitor";
  }
  return "competitor";
}

GapRole parse_role(std::string_view text) {
  if (text == "me") return GapRole::Me;
  if (text == "partner") return GapRole::Partner;
  if (text == "competitor") return GapRole::Competitor;
  throw Error(ErrorCode::SchemaViolation, "unknown gap role '" + std::string(text) + "'");
}

/// Lattice clustering coefficient of a ring where each node links to the
/// `w` nearest nodes on either side.
double ring_clustering(unsigned w) {
  if (w < 2) return 0.0;
  return 3.0 * (w - 1) / (2.0 * (2 * w - 1));
}

class Builder {
 public:
  explicit Builder(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {}

  Scenario run() {
    validate();
    add_concept("technology", {});
    if (spec_.roi) plant_region(*spec_.roi);
    if (spec_.gap) plant_gap(*spec_.gap);
    plant_background();

    Scenario out;
    out.ontology = {{"format", 1}, {"nodes", nodes_}, {"edges", edges_}};
    bundle_.canonicalize();
    out.sources = bundle_;
    ledger_["seed"] = spec_.seed;
    ledger_["start_year"] = spec_.start_year;
    ledger_["years"] = spec_.years;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, metrics] : perf_) {
      const auto& [org, year, tech] = key;
      nlohmann::json m = nlohmann::json::object();
      for (std::size_t i = 0; i < kMetrics.size(); ++i) m[kMetrics[i]] = metrics[i];
      rows.push_back({{"org", org}, {"interval", year}, {"tech", tech}, {"metrics", m}});
    }
    ledger_["performance"] = rows;
    out.ledger = ledger_;
    return out;
  }

 private:
  using PerfKey = std::tuple<std::string, int, std::string>;

  void validate() const {
    if (spec_.years < 2) throw Error(ErrorCode::InfeasibleSpec, "a scenario needs at least two years");
    if (const auto& r = spec_.roi) {
      const unsigned width = final_width(*r);
      if (r->nodes < 3 || r->orgs == 0 || r->nodes / r->orgs < 2) {
        throw Error(ErrorCode::InfeasibleSpec, "region needs at least 3 nodes and at least 2 per organization arc");
      }
      if (r->base_width < 2) throw Error(ErrorCode::InfeasibleSpec, "base lattice width must be at least 2");
      if (r->growth && r->growth_years + 1 > spec_.years) {
        throw Error(ErrorCode::InfeasibleSpec, "growth schedule exceeds the covered years");
      }
      if (2 * static_cast<std::size_t>(width) >= r->nodes) {
        throw Error(ErrorCode::InfeasibleSpec, "lattice width " + std::to_string(width) +
                                                   " is too wide for " + std::to_string(r->nodes) +
                                                   " nodes");
      }
      if (ring_clustering(width) < r->target_clustering) {
        throw Error(ErrorCode::InfeasibleSpec,
                    "clustering target " + std::to_string(r->target_clustering) +
                        " is unreachable: a width-" + std::to_string(width) + " lattice reaches " +
                        std::to_string(ring_clustering(width)));
      }
    }
    if (const auto& g = spec_.gap) {
      if (g->techs < 5) throw Error(ErrorCode::InfeasibleSpec, "gap region needs at least 5 technologies");
      if (g->techs / 2 - 2 > spec_.years - 1) {
        throw Error(ErrorCode::InfeasibleSpec, "too few years for the gap region to close");
      }
      if (g->theta < 0) throw Error(ErrorCode::InfeasibleSpec, "theta must be at least 0");
      std::size_t me = 0;
      for (const auto& o : g->orgs) {
        if (o.role == GapRole::Me) ++me;
        if (o.multiplier <= 0) throw Error(ErrorCode::InfeasibleSpec, o.name + ": multiplier must be > 0");
        if (o.arc_length == 0 || o.arc_length > g->techs) {
          throw Error(ErrorCode::InfeasibleSpec, o.name + ": arc length out of range");
        }
      }
      if (me != 1) throw Error(ErrorCode::InfeasibleSpec, "the gap plan needs exactly one 'me' organization");
    }
  }

  static unsigned final_width(const RoiPlan& r) {
    return r.base_width + r.growth_years * r.width_step;
  }

  std::string add_concept(const std::string& label, std::optional<std::string> parent,
                      const char* relation = "subclassOf") {
    const std::string id = slug(label);
    nodes_.push_back({{"id", id}, {"label", label}, {"synonyms", nlohmann::json::array()}, {"kind", "class"}});
    if (parent) edges_.push_back({{"parent", *parent}, {"child", id}, {"relation", relation}});
    return id;
  }

  Date date_in(int year) {
    const unsigned month = 1 + static_cast<unsigned>(rng_() % 12);
    const unsigned day = 1 + static_cast<unsigned>(rng_() % 28);
    return make_date(year, month, day);
  }

  std::string next_id(const char* prefix) { return prefix + std::to_string(++counter_); }

  void news(Date date, DocumentKind kind, const std::vector<std::string>& orgs,
            const std::vector<std::string>& techs) {
    NewsDocument d;
    d.doc_id = next_id(kind == DocumentKind::News ? "n" : "pub");
    d.publish_date = date;
    d.kind = kind;
    std::string body = kind == DocumentKind::News ? "Report on " : "Study of ";
    auto add = [&](const std::string& surface, MentionKind mk) {
      if (!d.mentions.empty()) body += ", ";
      d.mentions.push_back({surface, mk, body.size(), surface.size()});
      body += surface;
    };
    for (const auto& t : techs) add(t, MentionKind::Technology);
    for (const auto& o : orgs) add(o, MentionKind::Organization);
    body += ".";
    d.body = std::move(body);
    bundle_.news.push_back(std::move(d));
  }

  void patent(Date date, const std::vector<std::string>& orgs, const std::vector<std::string>& techs) {
    PatentRecord p;
    p.patent_id = next_id("P");
    p.title = "Method combining " + techs.front();
    p.grant_date = date;
    p.assignees = orgs;
    p.terms = techs;
    p.abstract_text = "An apparatus using " + techs.front() + ".";
    bundle_.patents.push_back(std::move(p));
  }

  void award(Date date, const std::string& org, double amount, const std::vector<std::string>& techs) {
    FundingRecord f;
    f.award_id = next_id("A");
    f.recipient = org;
    f.amount = amount;
    f.start_date = date;
    f.terms = techs;
    bundle_.funding.push_back(std::move(f));
  }

  /// Bookkeeping of the performance rows the landscape must reproduce.
  void book(const std::string& org, int year, const std::vector<std::string>& concepts,
            Metric metric, double amount) {
    for (const auto& c : concepts) perf_[{org_entity_id(org), year, c}][metric] += amount;
  }

  void plant_region(const RoiPlan& r) {
    const std::string root = add_concept(r.term, slug("technology"));
    std::vector<std::string> groups;
    for (const char* g : kRadarGroups) groups.push_back(add_concept(r.term + " " + g, root, "componentOf"));
    std::vector<std::string> labels, concepts;
    for (std::size_t i = 0; i < r.nodes; ++i) {
      const std::size_t g = i % groups.size();
      labels.push_back(r.term + " " + kRadarGroups[g] + " " + two_digits(i));
      concepts.push_back(add_concept(labels.back(), groups[g]));
    }
    std::vector<std::size_t> at(r.nodes);  // ring position -> technology
    std::iota(at.begin(), at.end(), 0);
    if (r.permute) std::shuffle(at.begin(), at.end(), rng_);

    const int base = spec_.start_year;
    std::vector<unsigned> widths;
    for (unsigned y = 0; y <= r.growth_years; ++y) {
      widths.push_back(r.growth ? r.base_width + y * r.width_step : final_width(r));
    }
    unsigned built = 0;
    for (unsigned y = 0; y < widths.size(); ++y) {
      const int year = r.growth ? base + static_cast<int>(y) : base;
      for (unsigned d = built + 1; d <= widths[y]; ++d) {
        for (std::size_t i = 0; i < r.nodes; ++i) {
          news(date_in(year), DocumentKind::News, {},
               {labels[at[i]], labels[at[(i + d) % r.nodes]]});
        }
      }
      built = std::max(built, widths[y]);
    }

    nlohmann::json orgs = nlohmann::json::array();
    const std::size_t arc = r.nodes / r.orgs;
    for (std::size_t k = 0; k < r.orgs; ++k) {
      const std::string name = std::string(kOrgStems[k % kOrgStems.size()]) + " " +
                               (k < kOrgStems.size() ? "Radar" : "Radar " + two_digits(k));
      orgs.push_back(org_entity_id(name));
      const std::size_t first = k * arc;
      const std::size_t last = (k + 1 == r.orgs) ? r.nodes : first + arc;
      for (std::size_t p = first; p < last; ++p) {
        news(date_in(base), DocumentKind::News, {name}, {labels[at[p]]});
        book(name, base, {concepts[at[p]]}, kNews, 1.0);
      }
      for (int y = base + 1; y < base + static_cast<int>(spec_.years); ++y) {
        const std::size_t p = first + static_cast<std::size_t>(y - base - 1) % (last - first - 1);
        const std::vector<std::string> pair{labels[at[p]], labels[at[p + 1]]};
        const std::vector<std::string> pair_c{concepts[at[p]], concepts[at[p + 1]]};
        patent(date_in(y), {name}, pair);
        book(name, y, pair_c, kPatents, 1.0);
        news(date_in(y), DocumentKind::Publication, {name}, pair);
        book(name, y, pair_c, kPublications, 1.0);
        if ((y - base) % 2 == 1) {
          award(date_in(y), name, 100000.0, pair);
          book(name, y, pair_c, kAwards, 100000.0);
        }
      }
    }

    nlohmann::json planted = nlohmann::json::array();
    nlohmann::json planted_concepts = nlohmann::json::array();
    for (std::size_t i = 0; i < r.nodes; ++i) {
      planted.push_back(tech_entity_id(labels[i]));
      planted_concepts.push_back(concepts[i]);
    }
    ledger_["roi"] = {{"term", r.term},
                      {"concept", root},
                      {"growth", r.growth},
                      {"widths", widths},
                      {"planted_nodes", planted},
                      {"planted_concepts", planted_concepts},
                      {"planted_orgs", orgs}};
  }

  void plant_gap(const GapPlan& g) {
    const std::string root = add_concept(g.term, slug("technology"));
    std::vector<std::string> labels, concepts;
    for (std::size_t i = 0; i < g.techs; ++i) {
      labels.push_back(g.term + " method " + two_digits(i));
      concepts.push_back(add_concept(labels.back(), root));
    }
    const int base = spec_.start_year;
    const unsigned full = static_cast<unsigned>(g.techs / 2);
    for (unsigned w = 1, year = 0; w <= full; ++w) {
      if (w > 2) ++year;
      for (std::size_t i = 0; i < g.techs; ++i) {
        if (2 * w == g.techs && i >= w) break;  // antipodal pairs once
        news(date_in(base + static_cast<int>(year)), DocumentKind::News, {},
             {labels[i], labels[(i + w) % g.techs]});
      }
    }

    std::string me;
    for (const auto& o : g.orgs) {
      if (o.role == GapRole::Me) me = o.name;
    }
    for (const auto& o : g.orgs) {
      if (o.role == GapRole::Partner) {
        bundle_.partnerships.push_back({me, o.name, "alliance", make_date(base, 2, 1)});
      }
    }

    // Activity window: every year after the base year.
    std::map<std::string, std::array<double, 4>> window;
    for (const auto& o : g.orgs) {
      std::vector<std::size_t> arc;
      for (std::size_t i = 0; i < o.arc_length; ++i) arc.push_back((o.arc_start + i) % g.techs);
      for (std::size_t p : arc) {
        news(make_date(base, 3, 1), DocumentKind::News, {o.name}, {labels[p]});
        book(o.name, base, {concepts[p]}, kNews, 1.0);
      }
      const auto count = static_cast<unsigned>(std::lround(o.multiplier * g.kpi_base));
      auto& w = window[o.name];
      for (unsigned k = 0; k < count; ++k) {
        const int year = base + 1 + static_cast<int>(k % (spec_.years - 1));
        // Adjacent arc positions only: their co-occurrence edge already exists.
        std::vector<std::size_t> picks{arc.front()};
        if (arc.size() > 1) {
          const std::size_t j = k % (arc.size() - 1);
          picks = {arc[j], arc[j + 1]};
        }
        std::vector<std::string> terms, cs;
        for (std::size_t p : picks) {
          terms.push_back(labels[p]);
          cs.push_back(concepts[p]);
        }
        const double width = static_cast<double>(cs.size());
        patent(date_in(year), {o.name}, terms);
        book(o.name, year, cs, kPatents, 1.0);
        news(date_in(year), DocumentKind::Publication, {o.name}, terms);
        book(o.name, year, cs, kPublications, 1.0);
        news(date_in(year), DocumentKind::News, {o.name}, terms);
        book(o.name, year, cs, kNews, 1.0);
        award(date_in(year), o.name, g.award_amount, terms);
        book(o.name, year, cs, kAwards, g.award_amount);
        w[kPatents] += width;
        w[kPublications] += width;
        w[kNews] += width;
        w[kAwards] += width * g.award_amount;
      }
    }

    std::array<double, 4> maxima{};
    for (const auto& [name, v] : window) {
      for (std::size_t m = 0; m < 4; ++m) maxima[m] = std::max(maxima[m], v[m]);
    }
    auto distance = [&](const std::array<double, 4>& a, const std::array<double, 4>& b) {
      double sum = 0.0;
      for (std::size_t m = 0; m < 4; ++m) {
        if (maxima[m] == 0.0) continue;
        const double d = (a[m] - b[m]) / maxima[m];
        sum += d * d;
      }
      return std::sqrt(sum);
    };

    nlohmann::json partners = nlohmann::json::array();
    nlohmann::json competitors = nlohmann::json::array();
    nlohmann::json participants = nlohmann::json::array();
    nlohmann::json distances = nlohmann::json::object();
    nlohmann::json roles = nlohmann::json::object();
    for (const auto& o : g.orgs) {
      const std::string id = org_entity_id(o.name);
      roles[id] = std::string(role_name(o.role));
      if (o.role == GapRole::Partner) partners.push_back(id);
      if (o.role != GapRole::Competitor) continue;
      const double d = distance(window[o.name], window[me]);
      distances[id] = d;
      // A single-technology organization can never join a quasi-clique.
      if (o.arc_length < 2) continue;
      participants.push_back(id);
      if (d > g.theta) competitors.push_back(id);
    }
    nlohmann::json techs = nlohmann::json::array();
    for (const auto& l : labels) techs.push_back(tech_entity_id(l));
    ledger_["gap"] = {{"term", g.term},
                      {"concept", root},
                      {"me", org_entity_id(me)},
                      {"roles", roles},
                      {"partners", partners},
                      {"participants", participants},
                      {"competitors", competitors},
                      {"theta", g.theta},
                      {"expected_distances", distances},
                      {"kpi_window", {base + 1, base + static_cast<int>(spec_.years) - 1}},
                      {"planted_nodes", techs}};
  }

  void plant_background() {
    if (spec_.background_techs < 2 || spec_.background_orgs == 0) return;
    const std::string root = add_concept("computing", slug("technology"));
    std::vector<std::string> techs, orgs;
    for (std::size_t i = 0; i < spec_.background_techs; ++i) {
      techs.push_back("computing technique " + two_digits(i));
      add_concept(techs.back(), root);
    }
    for (std::size_t i = 0; i < spec_.background_orgs; ++i) {
      orgs.push_back(std::string(kOrgStems[(kOrgStems.size() - 1 - i) % kOrgStems.size()]) +
                     " Computing " + two_digits(i));
    }
    auto pick = [&](const std::vector<std::string>& from, std::size_t n) {
      std::vector<std::string> out;
      while (out.size() < std::min(n, from.size())) {
        const auto& c = from[rng_() % from.size()];
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
      }
      return out;
    };
    for (std::size_t r = 0; r < spec_.background_records; ++r) {
      const int year = spec_.start_year + static_cast<int>(rng_() % spec_.years);
      switch (rng_() % 3) {
        case 0: patent(date_in(year), pick(orgs, 1 + rng_() % 2), pick(techs, 2 + rng_() % 2)); break;
        case 1: news(date_in(year), DocumentKind::News, pick(orgs, 1), pick(techs, 2)); break;
        default:
          award(date_in(year), pick(orgs, 1).front(), 1000.0 * static_cast<double>(1 + rng_() % 500),
                pick(techs, 1 + rng_() % 2));
      }
    }
    for (std::size_t i = 0; i + 1 < orgs.size(); i += 2) {
      bundle_.partnerships.push_back({orgs[i], orgs[i + 1], "supplier",
                                      make_date(spec_.start_year, 6, 1)});
    }
  }

  const ScenarioSpec& spec_;
  std::mt19937_64 rng_;
  std::size_t counter_ = 0;
  nlohmann::json nodes_ = nlohmann::json::array();
  nlohmann::json edges_ = nlohmann::json::array();
  SourceBundle bundle_;
  std::map<PerfKey, std::array<double, 4>> perf_;
  nlohmann::json ledger_ = nlohmann::json::object();
};

template <typename T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
  return t[key].value_or(fallback);
}

}  // namespace

ScenarioSpec ScenarioSpec::parse_toml(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario spec: ") + std::string(e.description()));
  }
  ScenarioSpec s;
  s.seed = static_cast<std::uint64_t>(get_or<std::int64_t>(tbl, "seed", 1));
  s.start_year = static_cast<int>(get_or<std::int64_t>(tbl, "start_year", s.start_year));
  s.years = static_cast<unsigned>(get_or<std::int64_t>(tbl, "years", s.years));
  if (const auto* bg = tbl["background"].as_table()) {
    s.background_techs = static_cast<std::size_t>(get_or<std::int64_t>(*bg, "techs", 30));
    s.background_orgs = static_cast<std::size_t>(get_or<std::int64_t>(*bg, "orgs", 6));
    s.background_records = static_cast<std::size_t>(get_or<std::int64_t>(*bg, "records", 60));
  }
  if (const auto* r = tbl["roi"].as_table()) {
    RoiPlan p;
    p.term = get_or<std::string>(*r, "term", p.term);
    p.nodes = static_cast<std::size_t>(get_or<std::int64_t>(*r, "nodes", 120));
    p.growth_years = static_cast<unsigned>(get_or<std::int64_t>(*r, "growth_years", 5));
    p.base_width = static_cast<unsigned>(get_or<std::int64_t>(*r, "base_width", 3));
    p.width_step = static_cast<unsigned>(get_or<std::int64_t>(*r, "width_step", 3));
    p.target_clustering = get_or<double>(*r, "target_clustering", p.target_clustering);
    p.orgs = static_cast<std::size_t>(get_or<std::int64_t>(*r, "orgs", 12));
    p.growth = get_or<bool>(*r, "growth", true);
    p.permute = get_or<bool>(*r, "permute", false);
    s.roi = p;
  }
  if (const auto* g = tbl["gap"].as_table()) {
    GapPlan p;
    p.term = get_or<std::string>(*g, "term", p.term);
    p.techs = static_cast<std::size_t>(get_or<std::int64_t>(*g, "techs", 10));
    p.theta = get_or<double>(*g, "theta", p.theta);
    p.kpi_base = static_cast<unsigned>(get_or<std::int64_t>(*g, "kpi_base", 4));
    p.award_amount = get_or<double>(*g, "award_amount", p.award_amount);
    if (const auto* orgs = (*g)["org"].as_array()) {
      for (const auto& node : *orgs) {
        const auto* o = node.as_table();
        if (!o) throw Error(ErrorCode::SchemaViolation, "gap.org entries must be tables");
        GapOrgPlan op;
        op.name = get_or<std::string>(*o, "name", "");
        if (op.name.empty()) throw Error(ErrorCode::SchemaViolation, "gap.org needs a name");
        op.role = parse_role(get_or<std::string>(*o, "role", "competitor"));
        op.multiplier = get_or<double>(*o, "multiplier", 1.0);
        op.arc_start = static_cast<std::size_t>(get_or<std::int64_t>(*o, "arc_start", 0));
        op.arc_length = static_cast<std::size_t>(get_or<std::int64_t>(*o, "arc_length", 5));
        p.orgs.push_back(std::move(op));
      }
    }
    s.gap = p;
  }
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

nlohmann::json ScenarioSpec::to_json() const {
  nlohmann::json j = {{"seed", seed},
                      {"start_year", start_year},
                      {"years", years},
                      {"background", {{"techs", background_techs},
                                      {"orgs", background_orgs},
                                      {"records", background_records}}}};
  if (roi) {
    j["roi"] = {{"term", roi->term},
                {"nodes", roi->nodes},
                {"growth_years", roi->growth_years},
                {"base_width", roi->base_width},
                {"width_step", roi->width_step},
                {"target_clustering", roi->target_clustering},
                {"orgs", roi->orgs},
                {"growth", roi->growth},
                {"permute", roi->permute}};
  }
  if (gap) {
    nlohmann::json orgs = nlohmann::json::array();
    for (const auto& o : gap->orgs) {
      orgs.push_back({{"name", o.name},
                      {"role", std::string(role_name(o.role))},
                      {"multiplier", o.multiplier},
                      {"arc_start", o.arc_start},
                      {"arc_length", o.arc_length}});
    }
    j["gap"] = {{"term", gap->term},
                {"techs", gap->techs},
                {"theta", gap->theta},
                {"kpi_base", gap->kpi_base},
                {"award_amount", gap->award_amount},
                {"org", orgs}};
  }
  return j;
}

ScenarioSpec ScenarioSpec::densification(std::uint64_t seed) {
  ScenarioSpec s;
  s.seed = seed;
  s.roi = RoiPlan{};
  return s;
}

ScenarioSpec ScenarioSpec::control(std::uint64_t seed) {
  ScenarioSpec s = densification(seed);
  s.roi->growth = false;
  s.roi->permute = true;
  return s;
}

ScenarioSpec ScenarioSpec::gap_default(std::uint64_t seed) {
  ScenarioSpec s;
  s.seed = seed;
  GapPlan g;
  g.orgs = {
      {"Meridian Systems", GapRole::Me, 1.0, 0, 5},
      {"Halcyon Devices", GapRole::Partner, 2.0, 0, 5},
      {"Quarry Optics", GapRole::Partner, 1.0, 2, 5},
      {"Tessera Dynamics", GapRole::Competitor, 4.0, 5, 5},
      {"Umbra Sensing", GapRole::Competitor, 1.75, 3, 5},
      {"Vireo Instruments", GapRole::Competitor, 3.0, 9, 1},
  };
  s.gap = g;
  return s;
}

Scenario generate_scenario(const ScenarioSpec& spec) { return Builder(spec).run(); }

void write_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("ontology.json");
    out << scenario.ontology.dump(2) << '\n';
  }
  const std::array<std::pair<SourceKind, const char*>, 4> files{{
      {SourceKind::Patents, "patents.jsonl"},
      {SourceKind::News, "news.jsonl"},
      {SourceKind::Funding, "funding.jsonl"},
      {SourceKind::Partnerships, "partnerships.jsonl"},
  }};
  for (const auto& [kind, name] : files) {
    auto out = open(name);
    write_source(kind, scenario.sources, out);
  }
  {
    auto out = open("view.toml");
    out << "name = \"scenario\"\n"
        << "ontology = \"ontology.json\"\n\n"
        << "[sources]\n";
    for (const auto& [kind, name] : files) {
      out << to_string(kind) << " = [\"" << name << "\"]\n";
    }
  }
  {
    auto out = open("ledger.json");
    out << scenario.ledger.dump(2) << '\n';
  }
}

}  // namespace techgap
