#include <charconv>
#include <cmath>

#include "cellvault/error.hpp"
#include "cellvault/ingest.hpp"
#include "utf8.hpp"

namespace cellvault {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
  }
  return true;
}

CellValue classify_field(const std::string& field) {
  if (auto n = parse_canonical_number(field)) return CellValue::number(*n);
  if (field == "TRUE") return CellValue::boolean(true);
  if (field == "FALSE") return CellValue::boolean(false);
  if (auto e = parse_error_literal(field)) return CellValue::error(*e);
  return CellValue::text(field);
}

}  // namespace

std::optional<double> parse_canonical_number(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  auto int_end = s.find_first_not_of("0123456789");
  std::string_view int_part = s.substr(0, int_end);
  if (!all_digits(int_part)) return std::nullopt;
  if (int_part.size() > 1 && int_part.front() == '0') return std::nullopt;
  std::string_view rest = int_end == std::string_view::npos ? std::string_view{} : s.substr(int_end);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    auto frac_end = rest.find_first_not_of("0123456789");
    if (!all_digits(rest.substr(0, frac_end))) return std::nullopt;
    rest = frac_end == std::string_view::npos ? std::string_view{} : rest.substr(frac_end);
  }
  if (!rest.empty() && (rest.front() == 'e' || rest.front() == 'E')) {
    rest.remove_prefix(1);
    if (!rest.empty() && (rest.front() == '+' || rest.front() == '-')) rest.remove_prefix(1);
    if (!all_digits(rest)) return std::nullopt;
    rest = {};
  }
  if (!rest.empty()) return std::nullopt;

  double value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

Sheet ingest_csv(std::string_view sheet_name, std::string_view bytes) {
  if (sheet_name.empty()) throw Error(ErrorCode::ConstraintError, "CSV sheet name must not be empty");
  if (!detail::valid_utf8(bytes)) throw Error(ErrorCode::FormatError, "CSV input is not valid UTF-8");
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);

  Sheet sheet{std::string(sheet_name)};
  std::uint32_t row = 1;
  std::uint32_t col = 1;
  std::string field;
  bool quoted = false;

  auto flush_field = [&] {
    if (!field.empty()) sheet.put({row, col}, Cell(classify_field(field)));
    field.clear();
    quoted = false;
    ++col;
  };
  auto end_record = [&] {
    flush_field();
    ++row;
    col = 1;
  };

  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    char ch = bytes[i];
    if (ch == '"' && field.empty() && !quoted) {
      // Quoted field: read to the closing quote, "" is a literal quote.
      quoted = true;
      ++i;
      bool closed = false;
      while (i < n) {
        if (bytes[i] == '"') {
          if (i + 1 < n && bytes[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        field += bytes[i++];
      }
      if (!closed) {
        throw Error(ErrorCode::FormatError, "CSV: unbalanced quote in row " + std::to_string(row));
      }
      if (i < n && bytes[i] != ',' && bytes[i] != '\n' && bytes[i] != '\r') {
        throw Error(ErrorCode::FormatError,
                    "CSV: unexpected character after closing quote in row " + std::to_string(row));
      }
      continue;
    }
    if (ch == '"') {
      throw Error(ErrorCode::FormatError, "CSV: stray quote inside unquoted field in row " + std::to_string(row));
    }
    if (ch == ',') {
      flush_field();
      ++i;
    } else if (ch == '\r' || ch == '\n') {
      end_record();
      i += (ch == '\r' && i + 1 < n && bytes[i + 1] == '\n') ? 2 : 1;
    } else {
      field += ch;
      ++i;
    }
  }
  // A trailing line break does not open a new record.
  if (n > 0 && bytes[n - 1] != '\n' && bytes[n - 1] != '\r') flush_field();
  return sheet;
}

}  // namespace cellvault
