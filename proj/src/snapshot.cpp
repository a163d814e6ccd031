#include "cellvault/snapshot.hpp"

#include "cellvault/error.hpp"

namespace cellvault {

Sheet::Sheet(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw Error(ErrorCode::ConstraintError, "sheet name must not be empty");
}

void Sheet::put(GridPos pos, Cell cell) {
  if (pos.row == 0 || pos.col == 0) {
    throw Error(ErrorCode::ConstraintError, "row and column are 1-based");
  }
  if (cell.is_blank()) {
    throw Error(ErrorCode::ConstraintError,
                "cell " + format_a1(pos) + " in sheet '" + name_ + "' has an empty value and no formula");
  }
  auto [it, inserted] = cells_.emplace(pos, std::move(cell));
  if (!inserted) {
    throw Error(ErrorCode::ConstraintError,
                "duplicate cell " + format_a1(pos) + " in sheet '" + name_ + "'");
  }
}

const Cell* Sheet::find(GridPos pos) const {
  auto it = cells_.find(pos);
  return it == cells_.end() ? nullptr : &it->second;
}

WorkbookSnapshot::WorkbookSnapshot(std::vector<Sheet> sheets) {
  for (auto& sheet : sheets) {
    auto name = sheet.name();
    if (!sheets_.emplace(name, std::make_shared<const Sheet>(std::move(sheet))).second) {
      throw Error(ErrorCode::ConstraintError, "duplicate sheet name '" + name + "'");
    }
  }
}

WorkbookSnapshot::WorkbookSnapshot(std::vector<SheetPtr> sheets) {
  for (auto& sheet : sheets) {
    auto name = sheet->name();
    if (!sheets_.emplace(name, std::move(sheet)).second) {
      throw Error(ErrorCode::ConstraintError, "duplicate sheet name '" + name + "'");
    }
  }
}

const Sheet* WorkbookSnapshot::find_sheet(const std::string& name) const {
  auto it = sheets_.find(name);
  return it == sheets_.end() ? nullptr : it->second.get();
}

const Cell* WorkbookSnapshot::find(const CellAddress& address) const {
  const Sheet* sheet = find_sheet(address.sheet);
  return sheet ? sheet->find(address.pos()) : nullptr;
}

std::size_t WorkbookSnapshot::cell_count() const {
  std::size_t n = 0;
  for (const auto& [_, sheet] : sheets_) n += sheet->size();
  return n;
}

bool operator==(const WorkbookSnapshot& a, const WorkbookSnapshot& b) {
  if (a.sheets_.size() != b.sheets_.size()) return false;
  auto it = b.sheets_.begin();
  for (const auto& [name, sheet] : a.sheets_) {
    if (name != it->first) return false;
    if (sheet != it->second && *sheet != *it->second) return false;
    ++it;
  }
  return true;
}

}  // namespace cellvault
