#include "cellvault/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>

#include "cellvault/error.hpp"

namespace cellvault {

std::string_view to_string(ErrorLiteral e) { return kErrorLiterals[static_cast<std::size_t>(e)]; }

std::optional<ErrorLiteral> parse_error_literal(std::string_view text) {
  for (std::size_t i = 0; i < kErrorLiterals.size(); ++i) {
    if (kErrorLiterals[i] == text) return static_cast<ErrorLiteral>(i);
  }
  return std::nullopt;
}

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Empty: return "empty";
    case ValueType::Number: return "number";
    case ValueType::Text: return "text";
    case ValueType::Boolean: return "boolean";
    case ValueType::Error: return "error";
  }
  return "unknown";
}

CellValue CellValue::number(double v) {
  if (std::isnan(v)) throw Error(ErrorCode::ConstraintError, "cell numbers must not be NaN");
  CellValue out;
  out.data_ = v == 0.0 ? 0.0 : v;
  return out;
}

CellValue CellValue::text(std::string v) {
  CellValue out;
  out.data_ = std::move(v);
  return out;
}

CellValue CellValue::boolean(bool v) {
  CellValue out;
  out.data_ = v;
  return out;
}

CellValue CellValue::error(ErrorLiteral e) {
  CellValue out;
  out.data_ = e;
  return out;
}

std::uint64_t CellValue::number_bits() const { return std::bit_cast<std::uint64_t>(as_number()); }

bool operator==(const CellValue& a, const CellValue& b) {
  if (a.type() != b.type()) return false;
  if (a.is_number()) return a.number_bits() == b.number_bits();
  return a.data_ == b.data_;
}

std::string display(const CellValue& value) {
  switch (value.type()) {
    case ValueType::Empty: return {};
    case ValueType::Number: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, value.as_number());
      return std::string(buf, res.ptr);
    }
    case ValueType::Text: return value.as_text();
    case ValueType::Boolean: return value.as_boolean() ? "TRUE" : "FALSE";
    case ValueType::Error: return std::string(to_string(value.as_error()));
  }
  return {};
}

std::string trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(ws);
  return std::string(text.substr(first, last - first + 1));
}

Cell::Cell(CellValue value, std::optional<std::string> formula) : value_(std::move(value)) {
  if (formula) {
    auto t = trim(*formula);
    if (!t.empty()) formula_ = std::move(t);
  }
}

}  // namespace cellvault
