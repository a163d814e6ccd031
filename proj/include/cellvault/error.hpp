#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cellvault {

enum class ErrorCode {
  MalformedAddress,
  MalformedRegion,
  FormatError,
  ConstraintError,
  UnsupportedFeature,
  NotFound,
  StoreCorrupt,
  ConcurrentWriter,
  WindowTooShort,
  RuleInvalid,
  DuplicateRuleId,
  SeriesTooShort,
  NonNumericSeries,
  LengthMismatch,
  ManifestInvalid,
  PathNotFound,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure in the library surfaces as this exception; `code()`
/// is what the CLI and HTTP layers map to exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cellvault
