#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "techgap/ingest.hpp"

namespace techgap {

/// A ring-lattice technology region whose lattice width grows each year.
/// Technologies at ring distance ≤ width co-occur; organizations each work
/// on one contiguous arc of the ring.
struct RoiPlan {
  std::string term = "radar";
  std::size_t nodes = 120;
  unsigned growth_years = 5;
  unsigned base_width = 3;
  unsigned width_step = 3;
  double target_clustering = 0.7;
  std::size_t orgs = 12;
  /// false: every lattice edge is stamped in the base year.
  bool growth = true;
  /// Shuffles which technology sits at which ring position.
  bool permute = false;
};

enum class GapRole : std::uint8_t { Me, Partner, Competitor };

struct GapOrgPlan {
  std::string name;
  GapRole role = GapRole::Competitor;
  /// Scales the reference activity volume.
  double multiplier = 1.0;
  std::size_t arc_start = 0;
  std::size_t arc_length = 5;
};

/// A small region where lattice width grows by one per year until the
/// technologies form a clique, with a reference organization, its declared
/// partners and competitors whose activity is a multiple of the reference.
struct GapPlan {
  std::string term = "sensor fusion";
  std::size_t techs = 10;
  double theta = 0.5;
  /// Records per metric for multiplier 1 over the activity window.
  unsigned kpi_base = 4;
  double award_amount = 250000.0;
  std::vector<GapOrgPlan> orgs;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int start_year = 2015;
  /// Calendar years covered; the first one is the base year.
  unsigned years = 6;
  std::size_t background_techs = 30;
  std::size_t background_orgs = 6;
  std::size_t background_records = 60;
  std::optional<RoiPlan> roi;
  std::optional<GapPlan> gap;

  static ScenarioSpec parse_toml(std::string_view text);
  static ScenarioSpec load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// 120-node growing region.
  static ScenarioSpec densification(std::uint64_t seed = 7);
  /// Same region with growth disabled and positions permuted.
  static ScenarioSpec control(std::uint64_t seed = 7);
  /// Ten-technology region with me, two partners and three competitors.
  static ScenarioSpec gap_default(std::uint64_t seed = 11);
};

struct Scenario {
  nlohmann::json ontology;
  SourceBundle sources;
  /// What was planted: region members, organizations, roles, expected
  /// performance rows and gap distances.
  nlohmann::json ledger;
};

/// Deterministic per seed. Throws InfeasibleSpec.
Scenario generate_scenario(const ScenarioSpec& spec);

/// ontology.json, the four JSONL sources, view.toml and ledger.json.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace techgap
