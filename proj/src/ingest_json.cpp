#include <cctype>
#include <cstring>
#include <limits>

#include <nlohmann/json.hpp>

#include "cellvault/error.hpp"
#include "cellvault/ingest.hpp"

namespace cellvault {
namespace {

using nlohmann::json;

[[noreturn]] void format_error(const std::string& detail) {
  throw Error(ErrorCode::FormatError, "workbook JSON: " + detail);
}

void expect_keys(const json& obj, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional, const char* what) {
  if (!obj.is_object()) format_error(std::string(what) + " must be an object");
  for (auto key : required) {
    if (!obj.contains(key)) format_error(std::string(what) + " is missing \"" + std::string(key) + "\"");
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || k == key;
    for (auto k : optional) known = known || k == key;
    if (!known) format_error(std::string(what) + " has unknown key \"" + key + "\"");
  }
}

std::uint32_t coordinate(const json& j, const char* what) {
  if (!j.is_number_integer()) format_error(std::string(what) + " must be an integer");
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v >= 1 && v <= static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) {
      return static_cast<std::uint32_t>(v);
    }
  }
  throw Error(ErrorCode::ConstraintError, std::string("workbook JSON: ") + what + " must be >= 1");
}

double number_from_bits(const std::string& hex) {
  if (hex.size() != 16) format_error("number bits must be 16 hex digits");
  std::uint64_t bits = 0;
  for (char ch : hex) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else format_error("number bits must be hex digits");
    bits = (bits << 4) | static_cast<std::uint64_t>(d);
  }
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

CellValue parse_value(const json& v) {
  if (!v.is_object() || !v.contains("t") || !v["t"].is_string()) format_error("value needs a string \"t\"");
  const auto& t = v["t"].get_ref<const std::string&>();
  if (t == "z") {
    expect_keys(v, {"t"}, {}, "empty value");
    return CellValue::empty();
  }
  if (t == "n") {
    expect_keys(v, {"t", "b"}, {}, "number value");
    if (!v["b"].is_string()) format_error("number bits must be a string");
    return CellValue::number(number_from_bits(v["b"].get<std::string>()));
  }
  expect_keys(v, {"t", "v"}, {}, "value");
  const json& payload = v["v"];
  if (t == "s") {
    if (!payload.is_string()) format_error("text value must be a string");
    return CellValue::text(payload.get<std::string>());
  }
  if (t == "b") {
    if (!payload.is_boolean()) format_error("boolean value must be true or false");
    return CellValue::boolean(payload.get<bool>());
  }
  if (t == "e") {
    if (!payload.is_string()) format_error("error value must be a string");
    auto lit = parse_error_literal(payload.get_ref<const std::string&>());
    if (!lit) {
      throw Error(ErrorCode::ConstraintError,
                  "workbook JSON: unknown error literal " + payload.get<std::string>());
    }
    return CellValue::error(*lit);
  }
  format_error("unknown value type \"" + t + "\"");
}

Sheet parse_sheet(const json& s) {
  expect_keys(s, {"name", "cells"}, {}, "sheet");
  if (!s["name"].is_string()) format_error("sheet name must be a string");
  if (!s["cells"].is_array()) format_error("sheet cells must be an array");
  Sheet sheet(s["name"].get<std::string>());
  for (const auto& c : s["cells"]) {
    expect_keys(c, {"r", "c", "v"}, {"f"}, "cell");
    GridPos pos{coordinate(c["r"], "row"), coordinate(c["c"], "column")};
    std::optional<std::string> formula;
    if (c.contains("f")) {
      if (!c["f"].is_string()) format_error("formula must be a string");
      formula = c["f"].get<std::string>();
    }
    sheet.put(pos, Cell(parse_value(c["v"]), std::move(formula)));
  }
  return sheet;
}

json parse_document(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    format_error(e.what());
  }
}

}  // namespace

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::Json: return "json";
    case SourceFormat::Csv: return "csv";
    case SourceFormat::Ooxml: return "ooxml";
  }
  return "unknown";
}

IngestReport ingest_json(std::string_view bytes) {
  json doc = parse_document(bytes);
  expect_keys(doc, {"sheets"}, {}, "workbook");
  if (!doc["sheets"].is_array()) format_error("\"sheets\" must be an array");
  std::vector<Sheet> sheets;
  sheets.reserve(doc["sheets"].size());
  for (const auto& s : doc["sheets"]) sheets.push_back(parse_sheet(s));
  IngestReport report;
  report.snapshot = WorkbookSnapshot(std::move(sheets));
  report.source_format = SourceFormat::Json;
  report.cell_count = report.snapshot.cell_count();
  return report;
}

Sheet ingest_sheet_json(std::string_view bytes) { return parse_sheet(parse_document(bytes)); }

IngestReport ingest_auto(std::string_view bytes) {
  if (looks_like_zip(bytes) || looks_like_ole2(bytes)) return ingest_ooxml(bytes);
  return ingest_json(bytes);
}

bool looks_like_zip(std::string_view bytes) { return bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4); }

bool looks_like_ole2(std::string_view bytes) {
  return bytes.substr(0, 8) == std::string_view("\xD0\xCF\x11\xE0\xA1\xB1\x1A\xE1", 8);
}

}  // namespace cellvault
