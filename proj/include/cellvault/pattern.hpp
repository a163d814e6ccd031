#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "cellvault/value.hpp"

namespace cellvault {

enum class PatternLabel { Stable, Step, Trend, Oscillation, Reversal, Irregular, NonNumeric };

std::string_view to_string(PatternLabel label);
std::optional<PatternLabel> parse_pattern_label(std::string_view text);

/// Labels a window of k >= 2 values, oldest first. With deltas
/// d[i] = v[i+1] - v[i], the first matching rule wins:
///   NonNumeric   any value is not a Number
///   Stable       all values equal
///   Step         the first k-1 values equal, the last differs
///   Trend        every delta nonzero, all the same sign
///   Oscillation  every delta nonzero, signs alternate
///   Reversal     the last nonzero delta opposes the previous nonzero delta
///   Irregular    anything else
/// Only equality and delta signs matter, so the label is invariant under
/// positive scaling and shifting. Throws WindowTooShort for k < 2.
PatternLabel classify_pattern(std::span<const CellValue> window);

}  // namespace cellvault
