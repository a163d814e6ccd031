#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace cellvault {

/// Current UTC time as RFC-3339 with millisecond precision, e.g.
/// "2026-10-19T08:15:30.250Z".
std::string utc_now_rfc3339();

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fraction]Z".
bool is_rfc3339_utc(std::string_view text);

/// Timestamp source; injectable so tests can pin time.
using Clock = std::function<std::string()>;

}  // namespace cellvault
