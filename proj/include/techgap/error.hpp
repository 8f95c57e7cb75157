#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace techgap {

/// Machine-readable failure categories. The string form of each code is part
/// of the HTTP and CLI contracts.
enum class ErrorCode {
  InvalidArgument,
  IoError,
  // ontology
  InvalidOntology,
  CycleDetected,
  DuplicateConceptId,
  DanglingEdge,
  UnknownConcept,
  UnknownTerm,
  EmptyExpansion,
  // ingest / store
  ParseError,
  SchemaViolation,
  InfeasibleSpec,
  MappingConflict,
  OrphanEdge,
  MissingSnapshot,
  // analytics
  UnknownNode,
  UnstampedEdge,
  UnknownOrganization,
  SearchBudgetExceeded,
  // landscape / gap
  UnknownLandscape,
  UnknownDimension,
  DimensionMismatch,
  // service
  UnknownChartKind,
  UnknownJob,
  PortInUse,
  NotFound,
};

std::string_view to_string(ErrorCode code) noexcept;

/// HTTP status class used when an error crosses the API boundary.
int http_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace techgap
