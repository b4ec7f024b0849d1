#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ldp {

enum class ErrorKind {
  InvalidArgument,
  InvalidSpec,
  DomainViolation,
  NonConvergence,
  UnsupportedTail,
  BelowRange,
  MajorizationUnavailable,
  CFLViolation,
  TruncationTooSmall,
  GridMismatch,
  ComparisonViolated,
  InsufficientData,
  Saturated,
  MissingColumns,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Validation errors come from bad input; everything else is a numerical failure.
bool is_validation(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool ok, ErrorKind kind, const std::string& message) {
  if (!ok) throw Error(kind, message);
}

}  // namespace ldp
