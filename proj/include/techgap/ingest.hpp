#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "techgap/data_model.hpp"
#include "techgap/error.hpp"

namespace techgap {

enum class SourceKind : std::uint8_t { Patents, News, Funding, Partnerships };

inline constexpr std::array<SourceKind, 4> kAllSourceKinds{
    SourceKind::Patents, SourceKind::News, SourceKind::Funding, SourceKind::Partnerships};

std::string_view to_string(SourceKind kind) noexcept;
std::optional<SourceKind> parse_source_kind(std::string_view text) noexcept;

struct IpTransfer {
  std::string from;
  std::string to;
  Date date{};
  auto operator<=>(const IpTransfer&) const = default;
};

struct PatentRecord {
  std::string patent_id;
  std::string title;
  Date grant_date{};
  std::vector<std::string> assignees;
  std::vector<std::string> terms;
  std::string abstract_text;
  std::vector<IpTransfer> ip_transfers;
  auto operator<=>(const PatentRecord&) const = default;
};

enum class MentionKind : std::uint8_t { Technology, Organization };

struct Mention {
  std::string surface;
  MentionKind kind = MentionKind::Technology;
  std::size_t offset = 0;
  std::size_t length = 0;
  auto operator<=>(const Mention&) const = default;
};

enum class DocumentKind : std::uint8_t { News, Publication };

struct NewsDocument {
  std::string doc_id;
  Date publish_date{};
  DocumentKind kind = DocumentKind::News;
  std::string body;
  std::vector<Mention> mentions;
  auto operator<=>(const NewsDocument&) const = default;
};

struct FundingRecord {
  std::string award_id;
  std::string recipient;
  double amount = 0.0;
  Date start_date{};
  std::vector<std::string> terms;
  auto operator<=>(const FundingRecord&) const = default;
};

struct PartnershipRecord {
  std::string org_a;
  std::string org_b;
  std::string relation;
  Date since_date{};
  auto operator<=>(const PartnershipRecord&) const = default;
};

/// Validated records of all four source kinds.
struct SourceBundle {
  std::vector<PatentRecord> patents;
  std::vector<NewsDocument> news;
  std::vector<FundingRecord> funding;
  std::vector<PartnershipRecord> partnerships;

  void append(const SourceBundle& other);
  /// Sorts by record id; for a repeated id the later record wins.
  /// Partnerships are deduplicated by value.
  void canonicalize();
  bool empty() const;
  std::size_t record_count() const;

  bool operator==(const SourceBundle&) const = default;
};

struct Rejection {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::ParseError;
  std::string field;
  std::string message;
};

struct LoadedBatch {
  SourceKind kind = SourceKind::Patents;
  SourceBundle records;
  std::vector<Rejection> rejected;
};

/// Parses a JSONL file of one source kind. Bad lines become rejections;
/// only an unreadable file throws (IoError).
LoadedBatch load_source(SourceKind kind, const std::filesystem::path& path);
LoadedBatch parse_source(SourceKind kind, std::istream& in);

nlohmann::json to_json(const PatentRecord& r);
nlohmann::json to_json(const NewsDocument& r);
nlohmann::json to_json(const FundingRecord& r);
nlohmann::json to_json(const PartnershipRecord& r);
nlohmann::json to_json(const LoadedBatch& batch);

/// Writes one source kind of a bundle as JSONL.
void write_source(SourceKind kind, const SourceBundle& bundle, std::ostream& out);

struct DeriveOptions {
  /// Technology pairs co-occurring in fewer records than this are dropped.
  unsigned min_cooccurrence = 1;
};

/// Relationship edges implied by the records, sorted and duplicate-free.
std::vector<DataEdge> derive_relationships(const SourceBundle& bundle,
                                           const DeriveOptions& options = {});

}  // namespace techgap
