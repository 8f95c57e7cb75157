#pragma once

#include <optional>
#include <string_view>

#include "json.hpp"
#include "techgap/gap.hpp"
#include "techgap/landscape.hpp"

namespace techgap {

enum class ChartKind : std::uint8_t { Spider, Timeline, Comparative };

std::string_view to_string(ChartKind kind) noexcept;
/// Throws UnknownChartKind.
ChartKind parse_chart_kind(std::string_view text);

/// Source kinds with a volume in P and the metrics each one feeds.
inline constexpr std::array<std::string_view, 3> kSpiderSources{"patents", "news", "funding"};

/// Axes are the expansion concepts one level below the query's positive
/// seeds (the seeds themselves when they are leaves); each P technology
/// counts toward the first axis that contains it, else toward "other".
/// Series appear only for sources with nonzero volume, so each source
/// total equals the matching kpi_cube grand total.
nlohmann::json spider_chart(const ViewSnapshot& snapshot, const Landscape& landscape);

/// One row per P technology with its patent grants and awards dated inside
/// the landscape intervals.
nlohmann::json timeline_chart(const ViewSnapshot& snapshot, const Landscape& landscape);

/// Two ranked leader panels plus the gap magnitude of `me` per technology.
nlohmann::json comparative_chart(const ComparativeResult& result, std::string_view landscape_id);

}  // namespace techgap
