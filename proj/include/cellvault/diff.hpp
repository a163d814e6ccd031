#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellvault/address.hpp"
#include "cellvault/snapshot.hpp"

namespace cellvault {

enum class ChangeKind {
  CellAdded,
  CellRemoved,
  ValueChanged,
  FormulaChanged,
  ValueAndFormulaChanged,
  SheetAdded,
  SheetRemoved,
};

inline constexpr std::array<ChangeKind, 7> kAllChangeKinds = {
    ChangeKind::CellAdded,      ChangeKind::CellRemoved,            ChangeKind::ValueChanged,
    ChangeKind::FormulaChanged, ChangeKind::ValueAndFormulaChanged, ChangeKind::SheetAdded,
    ChangeKind::SheetRemoved};

std::string_view to_string(ChangeKind kind);
std::optional<ChangeKind> parse_change_kind(std::string_view text);

enum class Policy { Normal, Exceptional };

std::string_view to_string(Policy policy);

/// One difference between two snapshots.
///
/// Cell-level kinds address a real cell. SheetAdded/SheetRemoved address the
/// whole sheet (row = col = 0) and carry no cells; they are followed by one
/// CellAdded/CellRemoved record per cell of that sheet.
struct ChangeRecord {
  CellAddress address;
  ChangeKind kind = ChangeKind::ValueChanged;
  std::optional<Cell> old_cell;
  std::optional<Cell> new_cell;
  std::optional<Policy> policy;

  bool is_structural() const { return kind == ChangeKind::SheetAdded || kind == ChangeKind::SheetRemoved; }
  bool is_formula_change() const {
    return kind == ChangeKind::FormulaChanged || kind == ChangeKind::ValueAndFormulaChanged;
  }

  friend bool operator==(const ChangeRecord&, const ChangeRecord&) = default;
};

using ChangeSet = std::vector<ChangeRecord>;

/// Declared input areas. Value-only edits inside them are routine.
struct WatchConfig {
  std::vector<Region> input_regions;

  /// Throws MalformedRegion for a reversed or zero-based rectangle.
  void validate() const;
};

struct DiffSummary {
  std::map<ChangeKind, std::size_t> by_kind;
  std::map<std::string, std::size_t> by_sheet;
  std::size_t exceptional_count = 0;
  std::size_t total = 0;

  friend bool operator==(const DiffSummary&, const DiffSummary&) = default;
};

/// Records sorted by (sheet, row, col); values compare by bit pattern and
/// formulas by exact text. diff(x, x) is empty.
ChangeSet diff(const WorkbookSnapshot& old_snapshot, const WorkbookSnapshot& new_snapshot);

/// Normal iff ValueChanged inside an input region with no formula on either
/// side; every other record is Exceptional.
ChangeSet classify(ChangeSet changes, const WatchConfig& config);

DiffSummary summarize(const ChangeSet& changes);

}  // namespace cellvault
