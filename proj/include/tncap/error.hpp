#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tncap {

enum class ErrorKind {
  dangling_reference,
  isolated_vertex,
  non_positive_dim,
  empty_edge,
  duplicate_endpoint,
  unsupported_rank_shape,
  unsupported_structure,
  shape_mismatch,
  unsupported_local_dim,
  out_of_range,
  unknown_family,
  condition_violated,
  verification_failed,
  diverged,
  schema_violation,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dangling_reference: return "DanglingReference";
    case ErrorKind::isolated_vertex: return "IsolatedVertex";
    case ErrorKind::non_positive_dim: return "NonPositiveDim";
    case ErrorKind::empty_edge: return "EmptyEdge";
    case ErrorKind::duplicate_endpoint: return "DuplicateEndpoint";
    case ErrorKind::unsupported_rank_shape: return "UnsupportedRankShape";
    case ErrorKind::unsupported_structure: return "UnsupportedStructure";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::unsupported_local_dim: return "UnsupportedLocalDim";
    case ErrorKind::out_of_range: return "OutOfRange";
    case ErrorKind::unknown_family: return "UnknownFamily";
    case ErrorKind::condition_violated: return "ConditionViolated";
    case ErrorKind::verification_failed: return "VerificationFailed";
    case ErrorKind::diverged: return "Diverged";
    case ErrorKind::schema_violation: return "SchemaViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library. `subject()` names the offending
/// element (vertex id, edge index, JSON path, violated condition...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string subject, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + "(" + subject + "): " + message),
        kind_(kind),
        subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

}  // namespace tncap
