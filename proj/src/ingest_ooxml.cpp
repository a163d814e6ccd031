#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "cellvault/error.hpp"
#include "cellvault/ingest.hpp"
#include "utf8.hpp"
#include "xml_reader.hpp"
#include "zip_reader.hpp"

namespace cellvault {
namespace {

using detail::XmlReader;
using Event = XmlReader::Event;

constexpr std::string_view kOfficeDocumentRel = "/officeDocument";
constexpr std::string_view kSharedStringsRel = "/sharedStrings";
constexpr std::string_view kWorksheetRel = "/worksheet";

struct Relationship {
  std::string type;
  std::string target;
};

class Warnings {
 public:
  void once(const std::string& message) {
    if (seen_.insert(message).second) list_.push_back(message);
  }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> list_;
};

std::string read_part(const detail::ZipReader& zip, const std::string& name) {
  auto data = zip.read(name);
  if (!data) throw Error(ErrorCode::FormatError, "package is missing part '" + name + "'");
  if (!detail::valid_utf8(*data)) throw Error(ErrorCode::FormatError, "part '" + name + "' is not valid UTF-8");
  return std::move(*data);
}

std::string directory_of(const std::string& part) {
  auto slash = part.rfind('/');
  return slash == std::string::npos ? std::string{} : part.substr(0, slash + 1);
}

// Resolves a relationship target against the directory of its source part,
// collapsing "." and ".." segments.
std::string resolve_target(const std::string& base_dir, const std::string& target) {
  std::string joined = !target.empty() && target.front() == '/' ? target.substr(1) : base_dir + target;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= joined.size()) {
    auto slash = joined.find('/', start);
    if (slash == std::string::npos) slash = joined.size();
    std::string seg = joined.substr(start, slash - start);
    if (seg == "..") {
      if (!parts.empty()) parts.pop_back();
    } else if (!seg.empty() && seg != ".") {
      parts.push_back(seg);
    }
    start = slash + 1;
  }
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

std::map<std::string, Relationship> read_relationships(const detail::ZipReader& zip, const std::string& part) {
  std::map<std::string, Relationship> rels;
  auto dir = directory_of(part);
  auto file = part.substr(dir.size());
  std::string rels_name = dir + "_rels/" + file + ".rels";
  if (!zip.contains(rels_name)) return rels;
  std::string xml = read_part(zip, rels_name);
  XmlReader reader(xml);
  for (Event ev; (ev = reader.next()) != Event::Eof;) {
    if (ev == Event::Start && reader.name() == "Relationship") {
      auto id = reader.attr("Id");
      auto target = reader.attr("Target");
      if (!id || !target) continue;
      if (reader.attr("TargetMode").value_or("") == "External") continue;
      rels[*id] = {reader.attr("Type").value_or(""), resolve_target(dir, *target)};
    }
  }
  return rels;
}

bool ends_with(std::string_view s, std::string_view suffix) { return s.ends_with(suffix); }

// Text of a <si> or <is> element: the <t> runs, excluding phonetic hints.
std::string read_string_item(XmlReader& reader, Warnings& warnings) {
  std::string out;
  std::size_t target = reader.depth();
  int in_t = 0;
  int in_phonetic = 0;
  for (;;) {
    Event ev = reader.next();
    if (ev == Event::Start) {
      if (reader.name() == "t") ++in_t;
      else if (reader.name() == "rPh") ++in_phonetic;
      else if (reader.name() == "r") warnings.once("rich text runs flattened to plain text");
    } else if (ev == Event::End) {
      if (reader.depth() < target) return out;
      if (reader.name() == "t") --in_t;
      else if (reader.name() == "rPh") --in_phonetic;
    } else if (ev == Event::Text) {
      if (in_t > 0 && in_phonetic == 0) out += reader.text();
    } else {
      throw Error(ErrorCode::FormatError, "XML: unexpected end of document in string item");
    }
  }
}

std::vector<std::string> read_shared_strings(const std::string& xml, Warnings& warnings) {
  std::vector<std::string> strings;
  XmlReader reader(xml);
  for (Event ev; (ev = reader.next()) != Event::Eof;) {
    if (ev == Event::Start && reader.name() == "si") strings.push_back(read_string_item(reader, warnings));
  }
  return strings;
}

double parse_xml_number(const std::string& text) {
  auto t = trim(text);
  double v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::FormatError, "SpreadsheetML: bad numeric cell value '" + text + "'");
  }
  return v;
}

struct RawCell {
  std::string ref;
  std::string type;
  std::optional<std::string> formula;
  bool shared_dependent = false;
  std::optional<std::string> value;
  std::optional<std::string> inline_text;
};

CellValue typed_value(const RawCell& raw, const std::vector<std::string>& shared, Warnings& warnings) {
  const std::string& t = raw.type;
  if (t == "inlineStr") {
    return raw.inline_text ? CellValue::text(*raw.inline_text) : CellValue::empty();
  }
  if (!raw.value) return CellValue::empty();
  const std::string& v = *raw.value;
  // An empty <v/> (e.g. a formula never calculated) carries no cached value.
  if (t != "s" && t != "str" && trim(v).empty()) return CellValue::empty();
  if (t == "s") {
    std::size_t index = 0;
    auto trimmed = trim(v);
    auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), index);
    if (res.ec != std::errc{} || res.ptr != trimmed.data() + trimmed.size() || index >= shared.size()) {
      throw Error(ErrorCode::FormatError, "SpreadsheetML: bad shared string index '" + v + "'");
    }
    return CellValue::text(shared[index]);
  }
  if (t == "str") return CellValue::text(v);
  if (t == "b") {
    auto b = trim(v);
    if (b == "1" || b == "true") return CellValue::boolean(true);
    if (b == "0" || b == "false") return CellValue::boolean(false);
    throw Error(ErrorCode::FormatError, "SpreadsheetML: bad boolean cell value '" + v + "'");
  }
  if (t == "e") {
    if (auto lit = parse_error_literal(trim(v))) return CellValue::error(*lit);
    warnings.once("unrecognised error value " + v + " captured as text");
    return CellValue::text(v);
  }
  if (t == "d") {
    warnings.once("ISO date cells captured as text");
    return CellValue::text(v);
  }
  if (!t.empty() && t != "n") {
    throw Error(ErrorCode::FormatError, "SpreadsheetML: unknown cell type '" + t + "'");
  }
  return CellValue::number(parse_xml_number(v));
}

Sheet read_worksheet(const std::string& name, const std::string& xml, const std::vector<std::string>& shared,
                     Warnings& warnings) {
  Sheet sheet(name);
  XmlReader reader(xml);
  std::uint32_t row = 0;
  std::uint32_t next_col = 1;
  for (Event ev; (ev = reader.next()) != Event::Eof;) {
    if (ev != Event::Start) continue;
    const std::string& el = reader.name();
    if (el == "row") {
      auto r = reader.attr("r");
      if (r) {
        auto res = std::from_chars(r->data(), r->data() + r->size(), row);
        if (res.ec != std::errc{} || res.ptr != r->data() + r->size() || row == 0) {
          throw Error(ErrorCode::FormatError, "SpreadsheetML: bad row number '" + *r + "'");
        }
      } else {
        ++row;
      }
      next_col = 1;
    } else if (el == "mergeCells") {
      warnings.once("merged ranges ignored");
      reader.skip_element();
    } else if (el == "c") {
      RawCell raw;
      raw.ref = reader.attr("r").value_or("");
      raw.type = reader.attr("t").value_or("");
      if (auto s = reader.attr("s"); s && *s != "0") warnings.once("cell styles ignored");
      std::size_t target = reader.depth();
      for (;;) {
        Event cev = reader.next();
        if (cev == Event::End && reader.depth() < target) break;
        if (cev == Event::Eof) throw Error(ErrorCode::FormatError, "XML: unexpected end of document");
        if (cev != Event::Start) continue;
        if (reader.name() == "f") {
          bool shared_formula = reader.attr("t").value_or("") == "shared";
          auto text = reader.read_text();
          if (!trim(text).empty()) raw.formula = text;
          else if (shared_formula) raw.shared_dependent = true;
        } else if (reader.name() == "v") {
          raw.value = reader.read_text();
        } else if (reader.name() == "is") {
          raw.inline_text = read_string_item(reader, warnings);
        } else {
          reader.skip_element();
        }
      }
      GridPos pos;
      if (!raw.ref.empty()) {
        try {
          pos = parse_a1(raw.ref);
        } catch (const Error&) {
          throw Error(ErrorCode::FormatError, "SpreadsheetML: bad cell reference '" + raw.ref + "'");
        }
        if (row != 0 && pos.row != row) {
          throw Error(ErrorCode::FormatError, "SpreadsheetML: cell " + raw.ref + " outside its row");
        }
      } else {
        if (row == 0) throw Error(ErrorCode::FormatError, "SpreadsheetML: cell outside any row");
        pos = {row, next_col};
      }
      next_col = pos.col + 1;
      if (raw.shared_dependent) {
        warnings.once("shared formula dependents have no stored formula text; captured as values only");
      }
      std::optional<std::string> formula;
      if (raw.formula) formula = "=" + trim(*raw.formula);
      Cell cell(typed_value(raw, shared, warnings), std::move(formula));
      if (!cell.is_blank()) sheet.put(pos, std::move(cell));
    }
  }
  return sheet;
}

}  // namespace

IngestReport ingest_ooxml(std::string_view bytes) {
  if (looks_like_ole2(bytes)) {
    throw Error(ErrorCode::UnsupportedFeature,
                "OLE2 compound file: legacy binary workbook or encrypted package");
  }
  if (!looks_like_zip(bytes)) throw Error(ErrorCode::FormatError, "not a ZIP package");
  detail::ZipReader zip(bytes);
  Warnings warnings;

  std::string workbook_part;
  // The package-level relationships live in "_rels/.rels".
  for (const auto& [_, rel] : read_relationships(zip, "")) {
    if (ends_with(rel.type, kOfficeDocumentRel)) workbook_part = rel.target;
  }
  if (workbook_part.empty()) workbook_part = "xl/workbook.xml";
  if (!zip.contains(workbook_part)) {
    throw Error(ErrorCode::FormatError, "package has no workbook part ('" + workbook_part + "')");
  }

  struct SheetRef {
    std::string name;
    std::string rel_id;
  };
  std::vector<SheetRef> sheet_refs;
  {
    std::string xml = read_part(zip, workbook_part);
    XmlReader reader(xml);
    for (Event ev; (ev = reader.next()) != Event::Eof;) {
      if (ev != Event::Start) continue;
      if (reader.name() == "sheet") {
        auto name = reader.attr("name");
        auto id = reader.attr("id");
        if (!name || !id) throw Error(ErrorCode::FormatError, "workbook <sheet> lacks name or r:id");
        sheet_refs.push_back({*name, *id});
      } else if (reader.name() == "workbookPr") {
        auto d = reader.attr("date1904");
        if (d && (*d == "1" || *d == "true")) warnings.once("1904 date system ignored");
      } else if (reader.name() == "definedNames") {
        warnings.once("defined names ignored");
        reader.skip_element();
      }
    }
  }

  auto rels = read_relationships(zip, workbook_part);
  std::vector<std::string> shared;
  std::string shared_part;
  for (const auto& [_, rel] : rels) {
    if (ends_with(rel.type, kSharedStringsRel)) shared_part = rel.target;
  }
  if (shared_part.empty() && zip.contains(directory_of(workbook_part) + "sharedStrings.xml")) {
    shared_part = directory_of(workbook_part) + "sharedStrings.xml";
  }
  if (!shared_part.empty() && zip.contains(shared_part)) shared = read_shared_strings(read_part(zip, shared_part), warnings);

  std::vector<Sheet> sheets;
  for (const auto& ref : sheet_refs) {
    auto it = rels.find(ref.rel_id);
    if (it == rels.end()) throw Error(ErrorCode::FormatError, "sheet '" + ref.name + "' has no relationship");
    if (!ends_with(it->second.type, kWorksheetRel)) {
      warnings.once("non-worksheet sheet '" + ref.name + "' skipped");
      continue;
    }
    sheets.push_back(read_worksheet(ref.name, read_part(zip, it->second.target), shared, warnings));
  }

  IngestReport report;
  report.snapshot = WorkbookSnapshot(std::move(sheets));
  report.source_format = SourceFormat::Ooxml;
  report.cell_count = report.snapshot.cell_count();
  report.warnings = warnings.take();
  return report;
}

}  // namespace cellvault
