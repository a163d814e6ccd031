#include "cellvault/error.hpp"

namespace cellvault {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedAddress: return "MalformedAddress";
    case ErrorCode::MalformedRegion: return "MalformedRegion";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ConstraintError: return "ConstraintError";
    case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::ConcurrentWriter: return "ConcurrentWriter";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::RuleInvalid: return "RuleInvalid";
    case ErrorCode::DuplicateRuleId: return "DuplicateRuleId";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonNumericSeries: return "NonNumericSeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ManifestInvalid: return "ManifestInvalid";
    case ErrorCode::PathNotFound: return "PathNotFound";
  }
  return "Unknown";
}

}  // namespace cellvault
