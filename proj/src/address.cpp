#include "cellvault/address.hpp"

#include <cctype>
#include <limits>

#include "cellvault/error.hpp"

namespace cellvault {
namespace {

constexpr std::uint64_t kMaxIndex = std::numeric_limits<std::int32_t>::max();

[[noreturn]] void malformed(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::MalformedAddress,
              "malformed cell address '" + std::string(text) + "': " + std::string(why));
}

bool is_bare_sheet_char(char ch) {
  auto u = static_cast<unsigned char>(ch);
  return std::isalnum(u) || ch == '_' || ch == '.' || u >= 0x80;
}

std::string quote_sheet(const std::string& sheet) {
  bool bare = !sheet.empty() && sheet != "*";
  for (char ch : sheet) bare = bare && is_bare_sheet_char(ch);
  if (bare || sheet == "*") return sheet;
  std::string out = "'";
  for (char ch : sheet) {
    if (ch == '\'') out += '\'';
    out += ch;
  }
  out += '\'';
  return out;
}

// Splits "sheet!rest" honoring the quoted sheet form. Returns false when
// there is no sheet separator.
bool split_sheet(std::string_view text, std::string& sheet, std::string_view& rest) {
  if (!text.empty() && text.front() == '\'') {
    std::string name;
    std::size_t i = 1;
    while (i < text.size()) {
      if (text[i] == '\'') {
        if (i + 1 < text.size() && text[i + 1] == '\'') {
          name += '\'';
          i += 2;
          continue;
        }
        break;
      }
      name += text[i++];
    }
    if (i >= text.size() || i + 1 >= text.size() || text[i + 1] != '!') return false;
    sheet = std::move(name);
    rest = text.substr(i + 2);
    return !sheet.empty();
  }
  auto bang = text.rfind('!');
  if (bang == std::string_view::npos || bang == 0) return false;
  sheet = std::string(text.substr(0, bang));
  rest = text.substr(bang + 1);
  return true;
}

}  // namespace

GridPos parse_a1(std::string_view text) {
  if (text.empty()) malformed(text, "empty");
  std::size_t i = 0;
  std::uint64_t col = 0;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    col = col * 26 + static_cast<std::uint64_t>(std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1);
    if (col > kMaxIndex) malformed(text, "column out of range");
    ++i;
  }
  if (i == 0) malformed(text, "must start with column letters");
  if (i == text.size()) malformed(text, "missing row number");
  std::uint64_t row = 0;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (!std::isdigit(static_cast<unsigned char>(ch))) malformed(text, "unexpected character");
    row = row * 10 + static_cast<std::uint64_t>(ch - '0');
    if (row > kMaxIndex) malformed(text, "row out of range");
  }
  if (row == 0) malformed(text, "row must be >= 1");
  return {static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col)};
}

std::string column_letters(std::uint32_t col) {
  std::string out;
  while (col > 0) {
    --col;
    out.insert(out.begin(), static_cast<char>('A' + col % 26));
    col /= 26;
  }
  return out;
}

std::string format_a1(GridPos pos) { return column_letters(pos.col) + std::to_string(pos.row); }

std::string format_address(const CellAddress& address) {
  return quote_sheet(address.sheet) + "!" + format_a1(address.pos());
}

CellAddress parse_address(std::string_view text) {
  std::string sheet;
  std::string_view rest;
  if (!split_sheet(text, sheet, rest)) malformed(text, "expected Sheet!A1");
  GridPos pos = parse_a1(rest);
  return {std::move(sheet), pos.row, pos.col};
}

bool Region::contains(const CellAddress& address) const {
  if (sheet != "*" && sheet != address.sheet) return false;
  return address.row >= top_left.row && address.row <= bottom_right.row &&
         address.col >= top_left.col && address.col <= bottom_right.col;
}

bool Region::well_formed() const {
  return !sheet.empty() && top_left.row >= 1 && top_left.col >= 1 &&
         top_left.row <= bottom_right.row && top_left.col <= bottom_right.col;
}

Region parse_region(std::string_view text) {
  std::string sheet;
  std::string_view rest;
  if (!split_sheet(text, sheet, rest)) {
    throw Error(ErrorCode::MalformedRegion, "malformed region '" + std::string(text) + "': expected Sheet!A1:B2");
  }
  Region region;
  region.sheet = std::move(sheet);
  try {
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      region.top_left = region.bottom_right = parse_a1(rest);
    } else {
      region.top_left = parse_a1(rest.substr(0, colon));
      region.bottom_right = parse_a1(rest.substr(colon + 1));
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedRegion, e.what());
  }
  if (!region.well_formed()) {
    throw Error(ErrorCode::MalformedRegion,
                "malformed region '" + std::string(text) + "': top-left must not exceed bottom-right");
  }
  return region;
}

std::string format_region(const Region& region) {
  return quote_sheet(region.sheet) + "!" + format_a1(region.top_left) + ":" + format_a1(region.bottom_right);
}

}  // namespace cellvault
