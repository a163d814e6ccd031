#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellvault/diff.hpp"
#include "cellvault/version_store.hpp"

namespace cellvault {

/// Sample statistics (n - 1 denominators); slope is the least-squares fit
/// against the commit index 0..n-1.
struct SeriesStats {
  std::size_t n = 0;
  double mean = 0;
  double variance = 0;
  double slope = 0;
};

/// Throws SeriesTooShort for fewer than two values.
SeriesStats series_stats(std::span<const double> values);

/// Sample covariance of two commit-aligned series. Throws LengthMismatch,
/// SeriesTooShort.
double covariance(std::span<const double> a, std::span<const double> b);

/// Numbers of a history series. Throws NonNumericSeries when any point is
/// not a Number.
std::vector<double> numeric_values(const HistorySeries& series);

/// True when a transition changes formulas or structure: any formula edit,
/// an added or removed sheet, or an added or removed cell that carries a
/// formula.
bool is_volatile_transition(const ChangeSet& changes);

enum class RetirementVerdict { Ready, NotReady, InsufficientHistory };

std::string_view to_string(RetirementVerdict verdict);

struct RetirementReport {
  static constexpr std::size_t kDefaultWindow = 10;

  std::string workbook_id;
  std::size_t window = kDefaultWindow;
  /// Transitions inside the window: min(window, commits - 1).
  std::size_t commits_considered = 0;
  std::size_t formula_change_commits = 0;
  double volatility = 0;
  RetirementVerdict verdict = RetirementVerdict::InsufficientHistory;
};

/// Fraction of the last min(window, available) parent->child transitions
/// that are volatile; 0 when the lineage has a single commit. Throws
/// NotFound, ConstraintError for window 0.
double formula_volatility(const VersionStore& store, const std::string& workbook_id, std::size_t window);

/// Ready iff `window` transitions exist and none is volatile;
/// InsufficientHistory iff fewer than `window` transitions exist.
RetirementReport retirement_report(const VersionStore& store, const std::string& workbook_id,
                                   std::size_t window = RetirementReport::kDefaultWindow);

}  // namespace cellvault
