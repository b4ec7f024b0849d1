#include "ldp/error.hpp"

namespace ldp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::UnsupportedTail: return "UnsupportedTail";
    case ErrorKind::BelowRange: return "BelowRange";
    case ErrorKind::MajorizationUnavailable: return "MajorizationUnavailable";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ComparisonViolated: return "ComparisonViolated";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Saturated: return "Saturated";
    case ErrorKind::MissingColumns: return "MissingColumns";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidSpec:
    case ErrorKind::DomainViolation:
    case ErrorKind::BelowRange:
    case ErrorKind::UnsupportedTail:
    case ErrorKind::MajorizationUnavailable:
    case ErrorKind::CFLViolation:
    case ErrorKind::TruncationTooSmall:
    case ErrorKind::GridMismatch:
    case ErrorKind::InsufficientData:
    case ErrorKind::MissingColumns:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace ldp
