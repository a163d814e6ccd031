#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellvault/snapshot.hpp"

namespace cellvault {

enum class SourceFormat { Json, Csv, Ooxml };

std::string_view to_string(SourceFormat format);

struct IngestReport {
  WorkbookSnapshot snapshot;
  SourceFormat source_format = SourceFormat::Json;
  std::size_t cell_count = 0;
  std::vector<std::string> warnings;
};

/// Canonical-form JSON, with whitespace and key order relaxed.
/// Throws FormatError for grammar violations and ConstraintError for
/// duplicate addresses or sheets, NaN bit patterns and blank cells.
IngestReport ingest_json(std::string_view bytes);

/// A single `{"name":...,"cells":[...]}` sheet document (the per-sheet blob
/// format of the version store).
Sheet ingest_sheet_json(std::string_view bytes);

/// RFC-4180 CSV into one sheet. Empty fields produce no cell.
/// Throws FormatError (unbalanced quotes, invalid UTF-8) and
/// ConstraintError (empty sheet name).
Sheet ingest_csv(std::string_view sheet_name, std::string_view bytes);

/// Strict number grammar used for CSV fields: -?(0|[1-9][0-9]*)(.[0-9]+)?([eE][+-]?[0-9]+)?
/// Returns nullopt for anything else, including values that overflow.
std::optional<double> parse_canonical_number(std::string_view text);

/// ZIP/SpreadsheetML package: cached values plus formula text.
/// Throws FormatError (not a ZIP, missing workbook part, bad XML) and
/// UnsupportedFeature (encrypted package, legacy binary workbook).
IngestReport ingest_ooxml(std::string_view bytes);

/// Picks OOXML for ZIP signatures and JSON otherwise.
IngestReport ingest_auto(std::string_view bytes);

bool looks_like_zip(std::string_view bytes);
bool looks_like_ole2(std::string_view bytes);

}  // namespace cellvault
