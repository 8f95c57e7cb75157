#include "techgap/error.hpp"

namespace techgap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidOntology: return "InvalidOntology";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DuplicateConceptId: return "DuplicateConceptId";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::UnknownTerm: return "UnknownTerm";
    case ErrorCode::EmptyExpansion: return "EmptyExpansion";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::MappingConflict: return "MappingConflict";
    case ErrorCode::OrphanEdge: return "OrphanEdge";
    case ErrorCode::MissingSnapshot: return "MissingSnapshot";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnstampedEdge: return "UnstampedEdge";
    case ErrorCode::UnknownOrganization: return "UnknownOrganization";
    case ErrorCode::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::UnknownLandscape: return "UnknownLandscape";
    case ErrorCode::UnknownDimension: return "UnknownDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownChartKind: return "UnknownChartKind";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownConcept:
    case ErrorCode::UnknownLandscape:
    case ErrorCode::UnknownOrganization:
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownJob:
    case ErrorCode::UnknownChartKind:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::UnknownTerm:
    case ErrorCode::EmptyExpansion:
    case ErrorCode::UnknownDimension:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::SearchBudgetExceeded:
      return 422;
    case ErrorCode::MissingSnapshot:
      return 503;
    case ErrorCode::IoError:
    case ErrorCode::PortInUse:
      return 500;
    default:
      return 400;
  }
}

}  // namespace techgap
