#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cellvault/address.hpp"
#include "cellvault/value.hpp"

namespace cellvault {

/// One named sparse grid. Blank cells (Empty value, no formula) are never
/// stored.
class Sheet {
 public:
  using CellMap = std::map<GridPos, Cell>;

  /// Throws ConstraintError on an empty name.
  explicit Sheet(std::string name);

  /// Throws ConstraintError for a zero coordinate, a duplicate position or a
  /// blank cell.
  void put(GridPos pos, Cell cell);

  const std::string& name() const { return name_; }
  const CellMap& cells() const { return cells_; }
  const Cell* find(GridPos pos) const;
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  friend bool operator==(const Sheet&, const Sheet&) = default;

 private:
  std::string name_;
  CellMap cells_;
};

/// Immutable workbook content: the unit that gets versioned. Sheets are held
/// by shared pointer so copies are cheap and unchanged sheets can be shared
/// between versions.
class WorkbookSnapshot {
 public:
  using SheetPtr = std::shared_ptr<const Sheet>;
  using SheetMap = std::map<std::string, SheetPtr>;

  WorkbookSnapshot() = default;
  /// Throws ConstraintError on duplicate sheet names.
  explicit WorkbookSnapshot(std::vector<Sheet> sheets);
  explicit WorkbookSnapshot(std::vector<SheetPtr> sheets);

  const SheetMap& sheets() const { return sheets_; }
  const Sheet* find_sheet(const std::string& name) const;
  const Cell* find(const CellAddress& address) const;
  std::size_t cell_count() const;

  friend bool operator==(const WorkbookSnapshot& a, const WorkbookSnapshot& b);

 private:
  SheetMap sheets_;
};

}  // namespace cellvault
