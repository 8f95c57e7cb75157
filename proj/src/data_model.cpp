#include "techgap/data_model.hpp"

#include <array>

#include "techgap/error.hpp"

namespace techgap {

namespace {
constexpr std::array<std::string_view, kEdgeKindCount> kEdgeKindNames{
    "coOccurrence", "coOwnership", "ipTransfer", "worksOn", "partnership"};
}

std::string_view to_string(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::Technology: return "Technology";
    case EntityKind::Organization: return "Organization";
    case EntityKind::Patent: return "Patent";
    case EntityKind::Document: return "Document";
    case EntityKind::Award: return "Award";
  }
  return "Technology";
}

std::string_view to_string(EdgeKind kind) noexcept {
  return kEdgeKindNames[static_cast<std::size_t>(kind)];
}

std::optional<EdgeKind> parse_edge_kind(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kEdgeKindNames.size(); ++i) {
    if (kEdgeKindNames[i] == text) return static_cast<EdgeKind>(i);
  }
  return std::nullopt;
}

bool is_symmetric(EdgeKind kind) noexcept {
  return kind == EdgeKind::CoOccurrence || kind == EdgeKind::CoOwnership ||
         kind == EdgeKind::Partnership;
}

nlohmann::json to_json(EdgeKindMask mask) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < kEdgeKindCount; ++i) {
    if (mask.contains(static_cast<EdgeKind>(i))) out.push_back(std::string(kEdgeKindNames[i]));
  }
  return out;
}

EdgeKindMask edge_kind_mask_from_json(const nlohmann::json& j) {
  EdgeKindMask mask = EdgeKindMask::none();
  for (const auto& item : j) {
    auto kind = parse_edge_kind(item.get<std::string>());
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown edge kind " + item.dump());
    mask.set(*kind);
  }
  return mask;
}

nlohmann::json to_json(const Scalar& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

Scalar scalar_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? 1.0 : 0.0;
  throw Error(ErrorCode::SchemaViolation, "property values must be numbers or strings");
}

nlohmann::json to_json(const DataEdge& edge) {
  return {{"src", edge.src},
          {"dst", edge.dst},
          {"kind", std::string(to_string(edge.kind))},
          {"timestamp", format_date(edge.timestamp)},
          {"weight", edge.weight},
          {"origin", edge.origin}};
}

DataEdge data_edge_from_json(const nlohmann::json& j) {
  DataEdge e;
  e.src = j.at("src").get<std::string>();
  e.dst = j.at("dst").get<std::string>();
  auto kind = parse_edge_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::SchemaViolation, "unknown edge kind");
  e.kind = *kind;
  auto ts = parse_date(j.at("timestamp").get<std::string>());
  if (!ts) throw Error(ErrorCode::UnstampedEdge, "edge without a valid timestamp");
  e.timestamp = *ts;
  e.weight = j.value("weight", 1.0);
  e.origin = j.value("origin", std::string());
  return e;
}

}  // namespace techgap
