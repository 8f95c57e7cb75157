#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "techgap/text.hpp"

namespace techgap {

enum class EntityKind : std::uint8_t { Technology, Organization, Patent, Document, Award };

enum class EdgeKind : std::uint8_t { CoOccurrence, CoOwnership, IpTransfer, WorksOn, Partnership };

inline constexpr std::size_t kEdgeKindCount = 5;

std::string_view to_string(EntityKind kind) noexcept;
std::string_view to_string(EdgeKind kind) noexcept;
std::optional<EdgeKind> parse_edge_kind(std::string_view text) noexcept;

/// Undirected kinds are stored with src < dst.
bool is_symmetric(EdgeKind kind) noexcept;

/// Bit set over edge kinds, used to select which relationships feed an
/// analysis. Defaults to every kind.
class EdgeKindMask {
 public:
  constexpr EdgeKindMask() = default;
  static constexpr EdgeKindMask none() {
    EdgeKindMask m;
    m.bits_ = 0;
    return m;
  }
  constexpr EdgeKindMask& set(EdgeKind k) {
    bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
    return *this;
  }
  constexpr bool contains(EdgeKind k) const { return (bits_ >> static_cast<unsigned>(k)) & 1u; }
  constexpr bool operator==(const EdgeKindMask&) const = default;

 private:
  std::uint8_t bits_ = (1u << kEdgeKindCount) - 1;
};

nlohmann::json to_json(EdgeKindMask mask);
EdgeKindMask edge_kind_mask_from_json(const nlohmann::json& j);

using Scalar = std::variant<double, std::string>;

nlohmann::json to_json(const Scalar& value);
Scalar scalar_from_json(const nlohmann::json& j);

/// A timestamped relationship between two entities.
struct DataEdge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::CoOccurrence;
  Date timestamp{};
  double weight = 1.0;
  /// Id of the source record the edge was derived from.
  std::string origin;

  auto operator<=>(const DataEdge&) const = default;
};

nlohmann::json to_json(const DataEdge& edge);
DataEdge data_edge_from_json(const nlohmann::json& j);

inline std::string org_entity_id(std::string_view name) { return "org:" + normalize_term(name); }
inline std::string tech_entity_id(std::string_view term) { return "tech:" + normalize_term(term); }

}  // namespace techgap
