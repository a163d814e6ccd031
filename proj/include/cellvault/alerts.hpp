#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cellvault/address.hpp"
#include "cellvault/pattern.hpp"
#include "cellvault/snapshot.hpp"

namespace cellvault {

enum class RuleKind { ThresholdUp, ThresholdDown, DeltaAbs, RangeBreach, FormulaChanged };

std::string_view to_string(RuleKind kind);
std::optional<RuleKind> parse_rule_kind(std::string_view text);

/// A single-target trigger. `target` is a one-sheet rectangle; a single cell
/// is a 1x1 region. Which parameters apply depends on `kind`:
///   ThresholdUp / ThresholdDown  threshold
///   DeltaAbs                     delta (> 0)
///   RangeBreach                  lo <= hi
struct AlertRule {
  static constexpr std::size_t kDefaultWindow = 4;

  std::string rule_id;
  Region target;
  RuleKind kind = RuleKind::ThresholdUp;
  double threshold = 0;
  double delta = 0;
  double lo = 0;
  double hi = 0;
  std::size_t window = kDefaultWindow;

  /// Throws RuleInvalid.
  void validate() const;

  friend bool operator==(const AlertRule&, const AlertRule&) = default;
};

struct AlertFiring {
  std::string rule_id;
  CellAddress address;
  std::string commit_id;
  CellValue old_value;
  CellValue new_value;
  /// Tail of the cell's history ending with the triggering commit.
  std::vector<CellValue> window_values;
  PatternLabel pattern = PatternLabel::Irregular;

  friend bool operator==(const AlertFiring&, const AlertFiring&) = default;
};

/// Values of `address` at the most recent `count` committed versions up to
/// and including the parent of the commit being evaluated, oldest first.
using HistoryAccess = std::function<std::vector<CellValue>(const CellAddress& address, std::size_t count)>;

/// Crossing semantics, evaluated per targeted address:
///   ThresholdUp    old < T <= new
///   ThresholdDown  old > T >= new
///   DeltaAbs       |new - old| > d
///   RangeBreach    old in [lo, hi] and new outside it
///   FormulaChanged the formula text at the address changed
/// Value rules need numbers on both sides; with no parent nothing fires.
/// Output is ordered by rule_id, then address. Throws RuleInvalid.
std::vector<AlertFiring> evaluate(const std::vector<AlertRule>& rules, const WorkbookSnapshot* parent,
                                  const WorkbookSnapshot& next, const std::string& commit_id,
                                  const HistoryAccess& history);

/// rules.jsonl and alerts.jsonl inside a workbook directory.
std::vector<AlertRule> load_rules(const std::filesystem::path& workbook_dir);
void append_rule(const std::filesystem::path& workbook_dir, const AlertRule& rule);
std::vector<AlertFiring> load_firings(const std::filesystem::path& workbook_dir);
void append_firings(const std::filesystem::path& workbook_dir, const std::vector<AlertFiring>& firings);

}  // namespace cellvault
