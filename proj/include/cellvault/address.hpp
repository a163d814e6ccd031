#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cellvault {

/// 1-based grid coordinate inside one sheet. Ordered row-major.
struct GridPos {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend auto operator<=>(const GridPos&, const GridPos&) = default;
};

/// Sheet-qualified cell coordinate. Ordered by (sheet code points, row, col).
///
/// Row and col are >= 1 for real cells. Change records that describe a whole
/// sheet (added or removed) use row = col = 0; see `whole_sheet`.
struct CellAddress {
  std::string sheet;
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  static CellAddress whole_sheet(std::string sheet) { return {std::move(sheet), 0, 0}; }
  bool is_whole_sheet() const { return row == 0 && col == 0; }
  GridPos pos() const { return {row, col}; }

  friend bool operator==(const CellAddress&, const CellAddress&) = default;
  friend std::strong_ordering operator<=>(const CellAddress& a, const CellAddress& b) {
    if (auto c = a.sheet.compare(b.sheet); c != 0) {
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
};

/// Parses "A1"-style text into (col, row). Case-insensitive.
/// Throws Error(MalformedAddress).
GridPos parse_a1(std::string_view text);

/// Bijective base-26 column letters: 1 -> "A", 27 -> "AA".
std::string column_letters(std::uint32_t col);

std::string format_a1(GridPos pos);

/// "Sheet!A1"; the sheet part is single-quoted when it contains characters
/// other than letters, digits, '_' or '.'.
std::string format_address(const CellAddress& address);

/// Accepts "Sheet!A1" and "'Quoted ''name'''!A1". Throws MalformedAddress.
CellAddress parse_address(std::string_view text);

/// Sheet-scoped rectangle. `sheet` may be "*" where a pattern is allowed
/// (watch regions); everywhere else it names one sheet exactly.
struct Region {
  std::string sheet;
  GridPos top_left;
  GridPos bottom_right;

  bool contains(const CellAddress& address) const;
  bool well_formed() const;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Accepts "Sheet!A1:C10", "Sheet!B2" (single cell) and "*!A1:B2".
/// Throws MalformedRegion, including for reversed corners.
Region parse_region(std::string_view text);
std::string format_region(const Region& region);

}  // namespace cellvault
