#include "cellvault/alerts.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cellvault/api_json.hpp"
#include "cellvault/error.hpp"
#include "fs_util.hpp"

namespace cellvault {
namespace {

[[noreturn]] void invalid(const AlertRule& rule, const std::string& why) {
  throw Error(ErrorCode::RuleInvalid, "rule '" + rule.rule_id + "': " + why);
}

bool fires(const AlertRule& rule, const Cell* old_cell, const Cell* new_cell) {
  if (rule.kind == RuleKind::FormulaChanged) {
    return old_cell && new_cell && old_cell->formula() != new_cell->formula();
  }
  if (!old_cell || !new_cell || !old_cell->value().is_number() || !new_cell->value().is_number()) return false;
  double prev = old_cell->value().as_number();
  double cur = new_cell->value().as_number();
  switch (rule.kind) {
    case RuleKind::ThresholdUp: return prev < rule.threshold && rule.threshold <= cur;
    case RuleKind::ThresholdDown: return prev > rule.threshold && rule.threshold >= cur;
    case RuleKind::DeltaAbs: return std::fabs(cur - prev) > rule.delta;
    case RuleKind::RangeBreach: {
      bool was_inside = prev >= rule.lo && prev <= rule.hi;
      bool is_inside = cur >= rule.lo && cur <= rule.hi;
      return was_inside && !is_inside;
    }
    case RuleKind::FormulaChanged: break;
  }
  return false;
}

std::vector<CellAddress> targeted(const Region& target, const WorkbookSnapshot* parent,
                                  const WorkbookSnapshot& next) {
  if (target.top_left == target.bottom_right) {
    return {{target.sheet, target.top_left.row, target.top_left.col}};
  }
  std::set<GridPos> positions;
  auto collect = [&](const WorkbookSnapshot* snap) {
    if (!snap) return;
    const Sheet* sheet = snap->find_sheet(target.sheet);
    if (!sheet) return;
    auto it = sheet->cells().lower_bound({target.top_left.row, 0});
    for (; it != sheet->cells().end() && it->first.row <= target.bottom_right.row; ++it) {
      if (it->first.col >= target.top_left.col && it->first.col <= target.bottom_right.col) {
        positions.insert(it->first);
      }
    }
  };
  collect(parent);
  collect(&next);
  std::vector<CellAddress> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back({target.sheet, p.row, p.col});
  return out;
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::ThresholdUp: return "ThresholdUp";
    case RuleKind::ThresholdDown: return "ThresholdDown";
    case RuleKind::DeltaAbs: return "DeltaAbs";
    case RuleKind::RangeBreach: return "RangeBreach";
    case RuleKind::FormulaChanged: return "FormulaChanged";
  }
  return "Unknown";
}

std::optional<RuleKind> parse_rule_kind(std::string_view text) {
  for (auto k : {RuleKind::ThresholdUp, RuleKind::ThresholdDown, RuleKind::DeltaAbs, RuleKind::RangeBreach,
                 RuleKind::FormulaChanged}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void AlertRule::validate() const {
  if (rule_id.empty()) invalid(*this, "rule_id must not be empty");
  if (!target.well_formed() || target.sheet == "*") invalid(*this, "target must be a single-sheet cell or region");
  if (window < 2) invalid(*this, "window must be >= 2");
  switch (kind) {
    case RuleKind::ThresholdUp:
    case RuleKind::ThresholdDown:
      if (!std::isfinite(threshold)) invalid(*this, "threshold must be finite");
      break;
    case RuleKind::DeltaAbs:
      if (!std::isfinite(delta) || delta <= 0) invalid(*this, "delta must be > 0");
      break;
    case RuleKind::RangeBreach:
      if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) invalid(*this, "range needs lo <= hi");
      break;
    case RuleKind::FormulaChanged: break;
  }
}

std::vector<AlertFiring> evaluate(const std::vector<AlertRule>& rules, const WorkbookSnapshot* parent,
                                  const WorkbookSnapshot& next, const std::string& commit_id,
                                  const HistoryAccess& history) {
  std::vector<const AlertRule*> ordered;
  for (const auto& r : rules) {
    r.validate();
    ordered.push_back(&r);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const AlertRule* a, const AlertRule* b) { return a->rule_id < b->rule_id; });

  std::vector<AlertFiring> firings;
  if (!parent) return firings;
  for (const AlertRule* rule : ordered) {
    for (const auto& address : targeted(rule->target, parent, next)) {
      const Cell* old_cell = parent->find(address);
      const Cell* new_cell = next.find(address);
      if (!fires(*rule, old_cell, new_cell)) continue;
      AlertFiring f;
      f.rule_id = rule->rule_id;
      f.address = address;
      f.commit_id = commit_id;
      f.old_value = old_cell ? old_cell->value() : CellValue{};
      f.new_value = new_cell ? new_cell->value() : CellValue{};
      f.window_values = history(address, rule->window - 1);
      f.window_values.push_back(f.new_value);
      f.pattern = f.window_values.size() >= 2 ? classify_pattern(f.window_values) : PatternLabel::NonNumeric;
      firings.push_back(std::move(f));
    }
  }
  return firings;
}

std::vector<AlertRule> load_rules(const std::filesystem::path& workbook_dir) {
  std::vector<AlertRule> rules;
  for (const auto& line : detail::read_lines(workbook_dir / "rules.jsonl")) {
    try {
      rules.push_back(rule_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::StoreCorrupt, std::string("unreadable rule line: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::StoreCorrupt, std::string("invalid stored rule: ") + e.what());
    }
  }
  return rules;
}

void append_rule(const std::filesystem::path& workbook_dir, const AlertRule& rule) {
  detail::append_line(workbook_dir / "rules.jsonl", to_json(rule).dump());
}

std::vector<AlertFiring> load_firings(const std::filesystem::path& workbook_dir) {
  std::vector<AlertFiring> firings;
  for (const auto& line : detail::read_lines(workbook_dir / "alerts.jsonl")) {
    try {
      firings.push_back(firing_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::StoreCorrupt, std::string("unreadable alert line: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::StoreCorrupt, std::string("invalid stored alert: ") + e.what());
    }
  }
  return firings;
}

void append_firings(const std::filesystem::path& workbook_dir, const std::vector<AlertFiring>& firings) {
  for (const auto& f : firings) detail::append_line(workbook_dir / "alerts.jsonl", to_json(f).dump());
}

}  // namespace cellvault
