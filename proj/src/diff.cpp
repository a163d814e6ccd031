#include "cellvault/diff.hpp"

#include "cellvault/error.hpp"

namespace cellvault {
namespace {

void emit_whole_sheet(ChangeSet& out, const Sheet& sheet, bool added) {
  out.push_back({CellAddress::whole_sheet(sheet.name()), added ? ChangeKind::SheetAdded : ChangeKind::SheetRemoved,
                 std::nullopt, std::nullopt, std::nullopt});
  for (const auto& [pos, cell] : sheet.cells()) {
    ChangeRecord rec{{sheet.name(), pos.row, pos.col},
                     added ? ChangeKind::CellAdded : ChangeKind::CellRemoved,
                     std::nullopt,
                     std::nullopt,
                     std::nullopt};
    (added ? rec.new_cell : rec.old_cell) = cell;
    out.push_back(std::move(rec));
  }
}

void diff_sheet(ChangeSet& out, const Sheet& a, const Sheet& b) {
  const auto& ac = a.cells();
  const auto& bc = b.cells();
  auto ia = ac.begin();
  auto ib = bc.begin();
  const std::string& name = a.name();
  while (ia != ac.end() || ib != bc.end()) {
    if (ib == bc.end() || (ia != ac.end() && ia->first < ib->first)) {
      out.push_back({{name, ia->first.row, ia->first.col}, ChangeKind::CellRemoved, ia->second, std::nullopt,
                     std::nullopt});
      ++ia;
    } else if (ia == ac.end() || ib->first < ia->first) {
      out.push_back({{name, ib->first.row, ib->first.col}, ChangeKind::CellAdded, std::nullopt, ib->second,
                     std::nullopt});
      ++ib;
    } else {
      const Cell& oc = ia->second;
      const Cell& nc = ib->second;
      bool same_value = oc.value() == nc.value();
      bool same_formula = oc.formula() == nc.formula();
      if (!same_value || !same_formula) {
        ChangeKind kind = !same_value && !same_formula ? ChangeKind::ValueAndFormulaChanged
                          : !same_value                ? ChangeKind::ValueChanged
                                                       : ChangeKind::FormulaChanged;
        out.push_back({{name, ia->first.row, ia->first.col}, kind, oc, nc, std::nullopt});
      }
      ++ia;
      ++ib;
    }
  }
}

}  // namespace

std::string_view to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::CellAdded: return "CellAdded";
    case ChangeKind::CellRemoved: return "CellRemoved";
    case ChangeKind::ValueChanged: return "ValueChanged";
    case ChangeKind::FormulaChanged: return "FormulaChanged";
    case ChangeKind::ValueAndFormulaChanged: return "ValueAndFormulaChanged";
    case ChangeKind::SheetAdded: return "SheetAdded";
    case ChangeKind::SheetRemoved: return "SheetRemoved";
  }
  return "Unknown";
}

std::optional<ChangeKind> parse_change_kind(std::string_view text) {
  for (auto k : kAllChangeKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Policy policy) { return policy == Policy::Normal ? "Normal" : "Exceptional"; }

void WatchConfig::validate() const {
  for (const auto& r : input_regions) {
    if (!r.well_formed()) throw Error(ErrorCode::MalformedRegion, "watch region is not well-formed");
  }
}

ChangeSet diff(const WorkbookSnapshot& old_snapshot, const WorkbookSnapshot& new_snapshot) {
  ChangeSet out;
  const auto& as = old_snapshot.sheets();
  const auto& bs = new_snapshot.sheets();
  auto ia = as.begin();
  auto ib = bs.begin();
  while (ia != as.end() || ib != bs.end()) {
    if (ib == bs.end() || (ia != as.end() && ia->first < ib->first)) {
      emit_whole_sheet(out, *ia->second, false);
      ++ia;
    } else if (ia == as.end() || ib->first < ia->first) {
      emit_whole_sheet(out, *ib->second, true);
      ++ib;
    } else {
      // Versions that share an unchanged sheet share the same object.
      if (ia->second != ib->second) diff_sheet(out, *ia->second, *ib->second);
      ++ia;
      ++ib;
    }
  }
  return out;
}

ChangeSet classify(ChangeSet changes, const WatchConfig& config) {
  config.validate();
  for (auto& rec : changes) {
    bool normal = false;
    if (rec.kind == ChangeKind::ValueChanged && !rec.old_cell->has_formula() && !rec.new_cell->has_formula()) {
      for (const auto& region : config.input_regions) {
        if (region.contains(rec.address)) {
          normal = true;
          break;
        }
      }
    }
    rec.policy = normal ? Policy::Normal : Policy::Exceptional;
  }
  return changes;
}

DiffSummary summarize(const ChangeSet& changes) {
  DiffSummary s;
  for (auto k : kAllChangeKinds) s.by_kind[k] = 0;
  for (const auto& rec : changes) {
    ++s.by_kind[rec.kind];
    ++s.by_sheet[rec.address.sheet];
    if (rec.policy == Policy::Exceptional) ++s.exceptional_count;
  }
  s.total = changes.size();
  return s;
}

}  // namespace cellvault
