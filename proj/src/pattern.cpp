#include "cellvault/pattern.hpp"

#include <array>
#include <vector>

#include "cellvault/error.hpp"

namespace cellvault {
namespace {

constexpr std::array<std::string_view, 7> kLabelNames = {"Stable",   "Step",      "Trend",     "Oscillation",
                                                         "Reversal", "Irregular", "NonNumeric"};

int sign_of_step(double from, double to) { return (to > from) - (to < from); }

}  // namespace

std::string_view to_string(PatternLabel label) { return kLabelNames[static_cast<std::size_t>(label)]; }

std::optional<PatternLabel> parse_pattern_label(std::string_view text) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == text) return static_cast<PatternLabel>(i);
  }
  return std::nullopt;
}

PatternLabel classify_pattern(std::span<const CellValue> window) {
  const std::size_t k = window.size();
  if (k < 2) throw Error(ErrorCode::WindowTooShort, "pattern window needs at least 2 values");
  for (const auto& v : window) {
    if (!v.is_number()) return PatternLabel::NonNumeric;
  }

  std::vector<int> signs(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) signs[i] = sign_of_step(window[i].as_number(), window[i + 1].as_number());

  bool all_zero = true;
  bool head_flat = true;
  bool all_nonzero = true;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    all_zero = all_zero && signs[i] == 0;
    all_nonzero = all_nonzero && signs[i] != 0;
    if (i + 1 < signs.size()) head_flat = head_flat && signs[i] == 0;
  }
  if (all_zero) return PatternLabel::Stable;
  if (head_flat) return PatternLabel::Step;

  if (all_nonzero) {
    bool same = true;
    bool alternating = true;
    for (std::size_t i = 1; i < signs.size(); ++i) {
      same = same && signs[i] == signs[0];
      alternating = alternating && signs[i] == -signs[i - 1];
    }
    if (same) return PatternLabel::Trend;
    if (alternating) return PatternLabel::Oscillation;
  }

  int last = 0;
  int previous = 0;
  for (auto it = signs.rbegin(); it != signs.rend(); ++it) {
    if (*it == 0) continue;
    if (last == 0) {
      last = *it;
    } else {
      previous = *it;
      break;
    }
  }
  if (last != 0 && previous != 0 && last != previous) return PatternLabel::Reversal;
  return PatternLabel::Irregular;
}

}  // namespace cellvault
