#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "cellvault/snapshot.hpp"

namespace cellvault {

/// SHA-256 of a snapshot's canonical bytes, as 64 lowercase hex digits.
class SnapshotHash {
 public:
  /// Throws FormatError unless `hex` is exactly 64 lowercase hex digits.
  explicit SnapshotHash(std::string hex);

  const std::string& hex() const { return hex_; }

  friend auto operator<=>(const SnapshotHash&, const SnapshotHash&) = default;

 private:
  std::string hex_;
};

/// Appends `text` as a JSON string literal: only '"', '\\' and control
/// characters are escaped (controls as \b \f \n \r \t or lowercase \u00xx).
void append_json_string(std::string& out, std::string_view text);

/// 16 lowercase hex digits of the big-endian IEEE-754 pattern.
std::string number_bits_hex(double value);

/// The `{"name":...,"cells":[...]}` fragment for one sheet. A snapshot's
/// canonical form is these fragments, in name order, joined inside
/// `{"sheets":[...]}`.
std::string canonical_sheet(const Sheet& sheet);

/// Deterministic minified JSON: sheets ascending by name, cells by (row, col).
std::string canonicalize(const WorkbookSnapshot& snapshot);

SnapshotHash snapshot_hash(const WorkbookSnapshot& snapshot);

}  // namespace cellvault
