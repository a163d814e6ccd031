#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cellvault {

enum class ErrorLiteral : std::uint8_t { Div0, NA, Name, Null, Num, Ref, Value };

inline constexpr std::array<std::string_view, 7> kErrorLiterals = {
    "#DIV/0!", "#N/A", "#NAME?", "#NULL!", "#NUM!", "#REF!", "#VALUE!"};

std::string_view to_string(ErrorLiteral e);
std::optional<ErrorLiteral> parse_error_literal(std::string_view text);

enum class ValueType : std::uint8_t { Empty, Number, Text, Boolean, Error };

/// Typed cell content. Numbers are never NaN and never negative zero.
class CellValue {
 public:
  CellValue() = default;

  static CellValue empty() { return {}; }
  /// Throws Error(ConstraintError) for NaN; -0.0 becomes +0.0.
  static CellValue number(double v);
  static CellValue text(std::string v);
  static CellValue boolean(bool v);
  static CellValue error(ErrorLiteral e);

  ValueType type() const { return static_cast<ValueType>(data_.index()); }
  bool is_empty() const { return type() == ValueType::Empty; }
  bool is_number() const { return type() == ValueType::Number; }

  double as_number() const { return std::get<double>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  bool as_boolean() const { return std::get<bool>(data_); }
  ErrorLiteral as_error() const { return std::get<ErrorLiteral>(data_); }

  /// IEEE-754 bit pattern of a Number value.
  std::uint64_t number_bits() const;

  /// Bit-level equality: numbers compare by bit pattern.
  friend bool operator==(const CellValue& a, const CellValue& b);

 private:
  std::variant<std::monostate, double, std::string, bool, ErrorLiteral> data_;
};

std::string_view to_string(ValueType t);

/// Human-oriented rendering used by text output and CSV export: shortest
/// round-trip decimal for numbers, TRUE/FALSE, error literals, raw text.
std::string display(const CellValue& value);

/// A populated cell. The formula keeps its leading '=' and is trimmed of
/// surrounding whitespace; a blank formula is treated as absent.
class Cell {
 public:
  Cell() = default;
  explicit Cell(CellValue value, std::optional<std::string> formula = std::nullopt);

  const CellValue& value() const { return value_; }
  const std::optional<std::string>& formula() const { return formula_; }
  bool has_formula() const { return formula_.has_value(); }

  /// True when the sparse model would omit this cell.
  bool is_blank() const { return value_.is_empty() && !formula_; }

  friend bool operator==(const Cell&, const Cell&) = default;

 private:
  CellValue value_;
  std::optional<std::string> formula_;
};

std::string trim(std::string_view text);

}  // namespace cellvault
