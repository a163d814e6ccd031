#include "cellvault/canonical.hpp"

#include <cstdio>

#include "cellvault/error.hpp"
#include "cellvault/sha256.hpp"

namespace cellvault {
namespace {

void append_cell(std::string& out, GridPos pos, const Cell& cell) {
  out += "{\"r\":";
  out += std::to_string(pos.row);
  out += ",\"c\":";
  out += std::to_string(pos.col);
  out += ",\"v\":";
  const CellValue& v = cell.value();
  switch (v.type()) {
    case ValueType::Empty:
      out += "{\"t\":\"z\"}";
      break;
    case ValueType::Number:
      out += "{\"t\":\"n\",\"b\":\"";
      out += number_bits_hex(v.as_number());
      out += "\"}";
      break;
    case ValueType::Text:
      out += "{\"t\":\"s\",\"v\":";
      append_json_string(out, v.as_text());
      out += '}';
      break;
    case ValueType::Boolean:
      out += v.as_boolean() ? "{\"t\":\"b\",\"v\":true}" : "{\"t\":\"b\",\"v\":false}";
      break;
    case ValueType::Error:
      out += "{\"t\":\"e\",\"v\":\"";
      out += to_string(v.as_error());
      out += "\"}";
      break;
  }
  if (cell.formula()) {
    out += ",\"f\":";
    append_json_string(out, *cell.formula());
  }
  out += '}';
}

}  // namespace

SnapshotHash::SnapshotHash(std::string hex) : hex_(std::move(hex)) {
  if (!is_sha256_hex(hex_)) {
    throw Error(ErrorCode::FormatError, "not a snapshot hash: '" + hex_ + "'");
  }
}

void append_json_string(std::string& out, std::string_view text) {
  out += '"';
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (u < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", u);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

std::string number_bits_hex(double value) {
  auto bits = CellValue::number(value).number_bits();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return std::string(buf, 16);
}

std::string canonical_sheet(const Sheet& sheet) {
  std::string out;
  out.reserve(32 + sheet.size() * 48);
  out += "{\"name\":";
  append_json_string(out, sheet.name());
  out += ",\"cells\":[";
  bool first = true;
  for (const auto& [pos, cell] : sheet.cells()) {
    if (!first) out += ',';
    first = false;
    append_cell(out, pos, cell);
  }
  out += "]}";
  return out;
}

std::string canonicalize(const WorkbookSnapshot& snapshot) {
  std::string out = "{\"sheets\":[";
  bool first = true;
  for (const auto& [_, sheet] : snapshot.sheets()) {
    if (!first) out += ',';
    first = false;
    out += canonical_sheet(*sheet);
  }
  out += "]}";
  return out;
}

SnapshotHash snapshot_hash(const WorkbookSnapshot& snapshot) {
  return SnapshotHash(sha256_hex(canonicalize(snapshot)));
}

}  // namespace cellvault
