#include "cellvault/analytics.hpp"

#include "cellvault/error.hpp"

namespace cellvault {
namespace {

// Sums run in binary128 so the statistics come out correctly rounded to
// double even when the spread is tiny compared with the magnitudes.
using Wide = __float128;

Wide wide_mean(std::span<const double> v) {
  Wide sum = 0;
  for (double x : v) sum += x;
  return sum / static_cast<Wide>(v.size());
}

struct TransitionCount {
  std::size_t considered = 0;
  std::size_t volatile_count = 0;
};

TransitionCount count_transitions(const VersionStore& store, const std::string& workbook_id, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::ConstraintError, "volatility window must be >= 1");
  auto records = store.log(workbook_id);
  std::size_t available = records.size() - 1;
  TransitionCount out;
  out.considered = std::min(window, available);
  SheetCache cache;
  std::size_t first_child = records.size() - out.considered;
  for (std::size_t i = first_child; i < records.size(); ++i) {
    auto parent = store.get_snapshot(records[i - 1].snapshot, cache);
    auto child = store.get_snapshot(records[i].snapshot, cache);
    if (is_volatile_transition(diff(parent, child))) ++out.volatile_count;
  }
  return out;
}

}  // namespace

SeriesStats series_stats(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::SeriesTooShort, "series statistics need at least 2 values");
  const std::size_t n = values.size();
  const Wide mean = wide_mean(values);
  // Centered indices are exact half-integers and sum to zero, so
  // sum(dx * y) is the least-squares numerator without touching the mean.
  const Wide x_mean = static_cast<Wide>(n - 1) / 2;
  Wide ss = 0;
  Wide sxy = 0;
  Wide sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Wide dy = values[i] - mean;
    Wide dx = static_cast<Wide>(i) - x_mean;
    ss += dy * dy;
    sxy += dx * values[i];
    sxx += dx * dx;
  }
  SeriesStats s;
  s.n = n;
  s.mean = static_cast<double>(mean);
  s.variance = static_cast<double>(ss / static_cast<Wide>(n - 1));
  s.slope = static_cast<double>(sxy / sxx);
  return s;
}

double covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "covariance needs equal-length series");
  if (a.size() < 2) throw Error(ErrorCode::SeriesTooShort, "covariance needs at least 2 values");
  const Wide ma = wide_mean(a);
  const Wide mb = wide_mean(b);
  Wide sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - ma) * (b[i] - mb);
  return static_cast<double>(sum / static_cast<Wide>(a.size() - 1));
}

std::vector<double> numeric_values(const HistorySeries& series) {
  std::vector<double> out;
  out.reserve(series.points.size());
  for (const auto& p : series.points) {
    if (!p.value.is_number()) {
      throw Error(ErrorCode::NonNumericSeries,
                  "history of " + format_address(series.address) + " has a non-numeric point at " + p.commit_id);
    }
    out.push_back(p.value.as_number());
  }
  return out;
}

bool is_volatile_transition(const ChangeSet& changes) {
  for (const auto& rec : changes) {
    if (rec.is_formula_change() || rec.is_structural()) return true;
    if (rec.kind == ChangeKind::CellAdded && rec.new_cell->has_formula()) return true;
    if (rec.kind == ChangeKind::CellRemoved && rec.old_cell->has_formula()) return true;
  }
  return false;
}

std::string_view to_string(RetirementVerdict verdict) {
  switch (verdict) {
    case RetirementVerdict::Ready: return "Ready";
    case RetirementVerdict::NotReady: return "NotReady";
    case RetirementVerdict::InsufficientHistory: return "InsufficientHistory";
  }
  return "Unknown";
}

double formula_volatility(const VersionStore& store, const std::string& workbook_id, std::size_t window) {
  auto t = count_transitions(store, workbook_id, window);
  return t.considered == 0 ? 0.0 : static_cast<double>(t.volatile_count) / static_cast<double>(t.considered);
}

RetirementReport retirement_report(const VersionStore& store, const std::string& workbook_id, std::size_t window) {
  auto t = count_transitions(store, workbook_id, window);
  RetirementReport r;
  r.workbook_id = workbook_id;
  r.window = window;
  r.commits_considered = t.considered;
  r.formula_change_commits = t.volatile_count;
  r.volatility = t.considered == 0 ? 0.0 : static_cast<double>(t.volatile_count) / static_cast<double>(t.considered);
  if (t.considered < window) r.verdict = RetirementVerdict::InsufficientHistory;
  else if (t.volatile_count == 0) r.verdict = RetirementVerdict::Ready;
  else r.verdict = RetirementVerdict::NotReady;
  return r;
}

}  // namespace cellvault
