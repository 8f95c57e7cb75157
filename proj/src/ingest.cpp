#include "techgap/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace techgap {

namespace {

constexpr int kSchemaVersion = 1;

struct FieldError {
  std::string field;
  std::string message;
};

std::string required_string(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) throw FieldError{field, "missing or not a string"};
  std::string value = j[field].get<std::string>();
  if (value.empty()) throw FieldError{field, "must not be empty"};
  return value;
}

std::string optional_string(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || j[field].is_null()) return {};
  if (!j[field].is_string()) throw FieldError{field, "not a string"};
  return j[field].get<std::string>();
}

Date required_date(const nlohmann::json& j, const char* field) {
  std::string text = required_string(j, field);
  auto date = parse_date(text);
  if (!date) throw FieldError{field, "invalid calendar date '" + text + "'"};
  return *date;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* field, bool required) {
  if (!j.contains(field)) {
    if (required) throw FieldError{field, "missing"};
    return {};
  }
  if (!j[field].is_array()) throw FieldError{field, "not an array"};
  std::vector<std::string> out;
  for (const auto& item : j[field]) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw FieldError{field, "entries must be nonempty strings"};
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

PatentRecord parse_patent(const nlohmann::json& j) {
  PatentRecord r;
  r.patent_id = required_string(j, "patent_id");
  r.title = optional_string(j, "title");
  r.grant_date = required_date(j, "grant_date");
  r.assignees = string_list(j, "assignees", true);
  if (r.assignees.empty()) throw FieldError{"assignees", "at least one assignee required"};
  r.terms = string_list(j, "terms", false);
  r.abstract_text = optional_string(j, "abstract");
  if (j.contains("ip_transfers")) {
    if (!j["ip_transfers"].is_array()) throw FieldError{"ip_transfers", "not an array"};
    for (const auto& t : j["ip_transfers"]) {
      r.ip_transfers.push_back(
          {required_string(t, "from"), required_string(t, "to"), required_date(t, "date")});
    }
  }
  return r;
}

NewsDocument parse_news(const nlohmann::json& j) {
  NewsDocument r;
  r.doc_id = required_string(j, "doc_id");
  r.publish_date = required_date(j, "publish_date");
  std::string kind = j.value("kind", std::string("news"));
  if (kind == "news") {
    r.kind = DocumentKind::News;
  } else if (kind == "publication") {
    r.kind = DocumentKind::Publication;
  } else {
    throw FieldError{"kind", "expected news or publication"};
  }
  r.body = optional_string(j, "body");
  if (j.contains("mentions")) {
    if (!j["mentions"].is_array()) throw FieldError{"mentions", "not an array"};
    for (const auto& m : j["mentions"]) {
      Mention mention;
      mention.surface = required_string(m, "surface");
      std::string mk = m.value("kind", std::string("technology"));
      if (mk == "technology") {
        mention.kind = MentionKind::Technology;
      } else if (mk == "organization") {
        mention.kind = MentionKind::Organization;
      } else {
        throw FieldError{"mentions.kind", "expected technology or organization"};
      }
      if (!m.contains("offset") || !m["offset"].is_number_unsigned() || !m.contains("length") ||
          !m["length"].is_number_unsigned()) {
        throw FieldError{"mentions.offset", "offset and length must be nonnegative integers"};
      }
      mention.offset = m["offset"].get<std::size_t>();
      mention.length = m["length"].get<std::size_t>();
      if (mention.offset + mention.length > r.body.size()) {
        throw FieldError{"mentions.offset", "mention lies outside the body"};
      }
      r.mentions.push_back(std::move(mention));
    }
  }
  return r;
}

FundingRecord parse_funding(const nlohmann::json& j) {
  FundingRecord r;
  r.award_id = required_string(j, "award_id");
  r.recipient = required_string(j, "recipient");
  if (!j.contains("amount") || !j["amount"].is_number()) throw FieldError{"amount", "missing or not a number"};
  r.amount = j["amount"].get<double>();
  if (!(r.amount >= 0.0)) throw FieldError{"amount", "must be nonnegative"};
  r.start_date = required_date(j, "start_date");
  r.terms = string_list(j, "terms", false);
  return r;
}

PartnershipRecord parse_partnership(const nlohmann::json& j) {
  PartnershipRecord r;
  r.org_a = required_string(j, "org_a");
  r.org_b = required_string(j, "org_b");
  if (normalize_term(r.org_a) == normalize_term(r.org_b)) {
    throw FieldError{"org_b", "partnership requires two distinct organizations"};
  }
  r.relation = optional_string(j, "relation");
  r.since_date = required_date(j, "since_date");
  return r;
}

template <typename Record, typename Key>
void dedupe_last_wins(std::vector<Record>& records, Key key) {
  std::map<std::string, Record> by_id;
  for (auto& r : records) by_id.insert_or_assign(key(r), std::move(r));
  records.clear();
  for (auto& [id, r] : by_id) records.push_back(std::move(r));
}

template <typename Pairs>
void add_pairs(const std::vector<std::string>& ids, Pairs&& emit) {
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) emit(ids[a], ids[b]);
  }
}

std::vector<std::string> normalized_ids(const std::vector<std::string>& names,
                                        std::string (*make)(std::string_view)) {
  std::set<std::string> ids;
  for (const auto& n : names) ids.insert(make(n));
  return {ids.begin(), ids.end()};
}

std::string make_org(std::string_view n) { return org_entity_id(n); }
std::string make_tech(std::string_view n) { return tech_entity_id(n); }

}  // namespace

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::Patents: return "patents";
    case SourceKind::News: return "news";
    case SourceKind::Funding: return "funding";
    case SourceKind::Partnerships: return "partnerships";
  }
  return "patents";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) noexcept {
  for (SourceKind k : kAllSourceKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void SourceBundle::append(const SourceBundle& other) {
  patents.insert(patents.end(), other.patents.begin(), other.patents.end());
  news.insert(news.end(), other.news.begin(), other.news.end());
  funding.insert(funding.end(), other.funding.begin(), other.funding.end());
  partnerships.insert(partnerships.end(), other.partnerships.begin(), other.partnerships.end());
}

void SourceBundle::canonicalize() {
  dedupe_last_wins(patents, [](const PatentRecord& r) { return r.patent_id; });
  dedupe_last_wins(news, [](const NewsDocument& r) { return r.doc_id; });
  dedupe_last_wins(funding, [](const FundingRecord& r) { return r.award_id; });
  std::sort(partnerships.begin(), partnerships.end());
  partnerships.erase(std::unique(partnerships.begin(), partnerships.end()), partnerships.end());
}

bool SourceBundle::empty() const { return record_count() == 0; }

std::size_t SourceBundle::record_count() const {
  return patents.size() + news.size() + funding.size() + partnerships.size();
}

LoadedBatch parse_source(SourceKind kind, std::istream& in) {
  LoadedBatch batch;
  batch.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      batch.rejected.push_back({line_no, ErrorCode::ParseError, "", e.what()});
      continue;
    }
    try {
      if (!j.is_object()) throw FieldError{"", "record must be a JSON object"};
      if (j.contains("v") && j["v"] != kSchemaVersion) throw FieldError{"v", "unsupported schema version"};
      switch (kind) {
        case SourceKind::Patents: batch.records.patents.push_back(parse_patent(j)); break;
        case SourceKind::News: batch.records.news.push_back(parse_news(j)); break;
        case SourceKind::Funding: batch.records.funding.push_back(parse_funding(j)); break;
        case SourceKind::Partnerships:
          batch.records.partnerships.push_back(parse_partnership(j));
          break;
      }
    } catch (const FieldError& e) {
      batch.rejected.push_back({line_no, ErrorCode::SchemaViolation, e.field, e.message});
    } catch (const nlohmann::json::exception& e) {
      batch.rejected.push_back({line_no, ErrorCode::SchemaViolation, "", e.what()});
    }
  }
  return batch;
}

LoadedBatch load_source(SourceKind kind, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_source(kind, in);
}

nlohmann::json to_json(const PatentRecord& r) {
  nlohmann::json transfers = nlohmann::json::array();
  for (const auto& t : r.ip_transfers) {
    transfers.push_back({{"from", t.from}, {"to", t.to}, {"date", format_date(t.date)}});
  }
  nlohmann::json j = {{"patent_id", r.patent_id}, {"title", r.title},
                      {"grant_date", format_date(r.grant_date)}, {"assignees", r.assignees},
                      {"terms", r.terms}, {"abstract", r.abstract_text}};
  if (!r.ip_transfers.empty()) j["ip_transfers"] = transfers;
  return j;
}

nlohmann::json to_json(const NewsDocument& r) {
  nlohmann::json mentions = nlohmann::json::array();
  for (const auto& m : r.mentions) {
    mentions.push_back({{"surface", m.surface},
                        {"kind", m.kind == MentionKind::Technology ? "technology" : "organization"},
                        {"offset", m.offset},
                        {"length", m.length}});
  }
  return {{"doc_id", r.doc_id},
          {"publish_date", format_date(r.publish_date)},
          {"kind", r.kind == DocumentKind::News ? "news" : "publication"},
          {"body", r.body},
          {"mentions", mentions}};
}

nlohmann::json to_json(const FundingRecord& r) {
  return {{"award_id", r.award_id}, {"recipient", r.recipient}, {"amount", r.amount},
          {"start_date", format_date(r.start_date)}, {"terms", r.terms}};
}

nlohmann::json to_json(const PartnershipRecord& r) {
  return {{"org_a", r.org_a}, {"org_b", r.org_b}, {"relation", r.relation},
          {"since_date", format_date(r.since_date)}};
}

nlohmann::json to_json(const LoadedBatch& batch) {
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : batch.rejected) {
    rejected.push_back({{"line", r.line},
                        {"code", std::string(to_string(r.code))},
                        {"field", r.field},
                        {"message", r.message}});
  }
  return {{"kind", std::string(to_string(batch.kind))},
          {"accepted", batch.records.record_count()},
          {"rejected", rejected}};
}

void write_source(SourceKind kind, const SourceBundle& bundle, std::ostream& out) {
  auto emit = [&](const auto& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
  };
  switch (kind) {
    case SourceKind::Patents: emit(bundle.patents); break;
    case SourceKind::News: emit(bundle.news); break;
    case SourceKind::Funding: emit(bundle.funding); break;
    case SourceKind::Partnerships: emit(bundle.partnerships); break;
  }
}

std::vector<DataEdge> derive_relationships(const SourceBundle& bundle,
                                           const DeriveOptions& options) {
  std::vector<DataEdge> edges;
  std::map<std::pair<std::string, std::string>, unsigned> joint_records;

  auto undirected = [&](EdgeKind kind, const std::string& a, const std::string& b, Date ts,
                        const std::string& origin) {
    if (a == b) return;
    edges.push_back({std::min(a, b), std::max(a, b), kind, ts, 1.0, origin});
  };
  auto directed = [&](EdgeKind kind, const std::string& a, const std::string& b, Date ts,
                      const std::string& origin) {
    if (a == b) return;
    edges.push_back({a, b, kind, ts, 1.0, origin});
  };
  auto cooccur = [&](const std::vector<std::string>& techs, Date ts, const std::string& origin) {
    add_pairs(techs, [&](const std::string& a, const std::string& b) {
      undirected(EdgeKind::CoOccurrence, a, b, ts, origin);
      ++joint_records[{a, b}];
    });
  };
  auto works_on = [&](const std::vector<std::string>& orgs, const std::vector<std::string>& techs,
                      Date ts, const std::string& origin) {
    for (const auto& o : orgs) {
      for (const auto& t : techs) directed(EdgeKind::WorksOn, o, t, ts, origin);
    }
  };

  for (const auto& p : bundle.patents) {
    const std::string origin = "patent:" + p.patent_id;
    auto orgs = normalized_ids(p.assignees, make_org);
    auto techs = normalized_ids(p.terms, make_tech);
    add_pairs(orgs, [&](const std::string& a, const std::string& b) {
      undirected(EdgeKind::CoOwnership, a, b, p.grant_date, origin);
    });
    works_on(orgs, techs, p.grant_date, origin);
    cooccur(techs, p.grant_date, origin);
    for (const auto& t : p.ip_transfers) {
      directed(EdgeKind::IpTransfer, org_entity_id(t.from), org_entity_id(t.to), t.date, origin);
    }
  }
  for (const auto& d : bundle.news) {
    const std::string origin = "doc:" + d.doc_id;
    std::vector<std::string> org_names, tech_names;
    for (const auto& m : d.mentions) {
      (m.kind == MentionKind::Organization ? org_names : tech_names).push_back(m.surface);
    }
    auto orgs = normalized_ids(org_names, make_org);
    auto techs = normalized_ids(tech_names, make_tech);
    works_on(orgs, techs, d.publish_date, origin);
    cooccur(techs, d.publish_date, origin);
  }
  for (const auto& f : bundle.funding) {
    const std::string origin = "award:" + f.award_id;
    auto techs = normalized_ids(f.terms, make_tech);
    works_on({org_entity_id(f.recipient)}, techs, f.start_date, origin);
    cooccur(techs, f.start_date, origin);
  }
  for (const auto& p : bundle.partnerships) {
    undirected(EdgeKind::Partnership, org_entity_id(p.org_a), org_entity_id(p.org_b), p.since_date,
               "partnership:" + normalize_term(p.org_a) + "|" + normalize_term(p.org_b));
  }

  if (options.min_cooccurrence > 1) {
    std::erase_if(edges, [&](const DataEdge& e) {
      return e.kind == EdgeKind::CoOccurrence &&
             joint_records[{e.src, e.dst}] < options.min_cooccurrence;
    });
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace techgap
