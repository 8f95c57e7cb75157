#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "techgap/landscape.hpp"

namespace techgap {

enum class Comparator : std::uint8_t { Lt, Le, Eq, Ge, Gt, Contains };

std::string_view to_string(Comparator op) noexcept;
std::optional<Comparator> parse_comparator(std::string_view text) noexcept;

struct Predicate {
  std::string field;
  Comparator op = Comparator::Eq;
  Scalar value;

  bool operator==(const Predicate&) const = default;
};

nlohmann::json to_json(const Predicate& p);

/// A missing or type-incompatible `actual` fails the predicate.
bool evaluate(const Predicate& p, const std::optional<Scalar>& actual);

/// Aggregates a clique rule may name.
inline constexpr std::array<std::string_view, 5> kCliqueFields{
    "newest_activity_age_days", "newest_activity_age_years", "member_count", "tech_count",
    "org_count"};

/// Organization rules over entity-table properties and clique rules over
/// quasi-clique aggregates.
struct ConditionSet {
  std::vector<Predicate> org_rules;
  std::vector<Predicate> clique_rules;

  /// `[[org]]` / `[[clique]]` tables of {field, op, value}. Throws
  /// ParseError, InvalidArgument.
  static ConditionSet parse_toml(std::string_view text);
  static ConditionSet load(const std::filesystem::path& path);
  static ConditionSet from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool operator==(const ConditionSet&) const = default;
};

struct RuleCheck {
  /// Position in the result's clique list for clique rules.
  std::optional<std::size_t> clique;
  Predicate predicate;
  std::optional<Scalar> actual;
  bool passed = false;
};

nlohmann::json to_json(const RuleCheck& check);

/// Conjunction over the organization's properties; empty rules pass.
bool o_rule(const EntityRecord& org, std::span<const Predicate> rules,
            std::vector<RuleCheck>* trace = nullptr);

struct QuasiCliqueInfo {
  std::vector<std::string> nodes;
  std::vector<std::string> technologies;
  std::vector<std::string> organizations;
  double gamma = 0.8;
  /// Latest timestamp among the clique's induced edges.
  Date newest_activity{};
};

std::optional<Scalar> clique_aggregate(const QuasiCliqueInfo& clique, std::string_view field, Date as_of);

/// Positions (into `candidates`) of cliques satisfying every rule.
std::vector<std::size_t> t_rule(std::span<const QuasiCliqueInfo> cliques,
                                std::span<const std::size_t> candidates,
                                std::span<const Predicate> rules, Date as_of,
                                std::vector<RuleCheck>* trace = nullptr);

using KpiVector = std::vector<double>;

/// Euclidean distance after dividing each metric by `maxima`; zero maxima
/// contribute nothing. Throws DimensionMismatch.
double kpi_distance(const KpiVector& a, const KpiVector& b, const KpiVector& maxima);

struct GapQuery {
  std::string landscape_id;
  std::string me;
  double theta = 0.5;
  ConditionSet cond;
  unsigned ego_radius = 1;
  double gamma = 0.8;
  std::size_t min_size = 3;
  /// Quasi-clique search tree bound; 0 is unbounded.
  std::size_t max_branches = 2'000'000;
};

nlohmann::json to_json(const GapQuery& query);
GapQuery gap_query_from_json(const nlohmann::json& j);

/// Accepts a number, "inf" or "infinity".
double theta_from_json(const nlohmann::json& j);
nlohmann::json theta_to_json(double theta);

struct GapTrace {
  bool participates = false;
  /// Clique positions the organization participates in.
  std::vector<std::size_t> cliques;
  std::vector<RuleCheck> org_checks;
  std::vector<RuleCheck> clique_checks;
  /// Participating cliques that passed every clique rule.
  std::vector<std::size_t> kept;
  double distance = 0.0;
  double theta = 0.0;
  bool included = false;
};

nlohmann::json to_json(const GapTrace& trace);

/// Recomputes the inclusion decision from the recorded evaluations.
bool replay(const GapTrace& trace);

struct GapEntry {
  std::string org;
  std::string name;
  KpiVector kpis;
  GapTrace trace;
};

struct GapResult {
  GapQuery query;
  std::string landscape_id;
  /// Reference date for clique ages: the snapshot's as-of date.
  Date as_of{};
  std::string me;
  std::vector<std::string> ego;
  std::vector<int> window;
  KpiVector me_kpis;
  KpiVector maxima;
  std::vector<QuasiCliqueInfo> cliques;
  /// Included competitors, by descending distance then org id.
  std::vector<GapEntry> results;
  /// Every other competitor candidate with its trace.
  std::vector<GapEntry> excluded;
};

/// `{query, landscape_id, as_of, window, ego, me, maxima, cliques, results,
/// excluded}`.
nlohmann::json to_json(const GapResult& result);

/// Per-organization KPI sums over the trailing `history` intervals.
std::map<std::string, KpiVector> kpi_vectors(const Landscape& landscape, unsigned history);

/// Resolves an organization entity id or display name. Throws
/// UnknownOrganization.
std::string resolve_organization(const ViewSnapshot& snapshot, std::string_view org);

/// Ego removal, quasi-cliques on G, organization and clique rules and the
/// KPI-distance threshold. Throws UnknownLandscape, UnknownOrganization,
/// SearchBudgetExceeded.
GapResult run_gap(const ViewSnapshot& snapshot, const Landscape& landscape, const GapQuery& query);

struct ComparativeQuery {
  std::string me;
  std::string tech_a;
  std::string tech_b;
  std::vector<std::string> context;
  std::optional<unsigned> max_depth = 8;
  LandscapeParams params;
  GapQuery gap;
};

nlohmann::json to_json(const ComparativeQuery& query);
ComparativeQuery comparative_query_from_json(const nlohmann::json& j, const LandscapeParams& defaults,
                                             const GapQuery& gap_defaults);

struct Leader {
  std::string org;
  std::string name;
  /// Sum of max-normalized window KPIs.
  double score = 0.0;
  KpiVector kpis;
};

struct TechGapSummary {
  std::string tech;
  Landscape landscape;
  std::vector<Leader> leaders;
  GapResult gap;
};

struct ComparativeResult {
  ComparativeQuery query;
  TechGapSummary a;
  TechGapSummary b;
};

nlohmann::json to_json(const TechGapSummary& summary);
nlohmann::json to_json(const ComparativeResult& result);

/// Landscape and gap pipeline per technology, each bounded by the context
/// expansion.
ComparativeResult comparative_gap(const ViewSnapshot& snapshot, const TemporalCommunityIndex& index,
                                  const ComparativeQuery& query);

}  // namespace techgap
