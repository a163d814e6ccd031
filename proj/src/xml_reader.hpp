#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cellvault::detail {

/// Minimal pull parser for the SpreadsheetML parts we read. Namespace
/// prefixes are stripped from element and attribute names; comments,
/// processing instructions and DOCTYPE are skipped. Throws FormatError on
/// malformed markup.
class XmlReader {
 public:
  enum class Event { Start, End, Text, Eof };

  explicit XmlReader(std::string_view xml) : xml_(xml) {}

  Event next();

  /// Local name of the current Start/End element.
  const std::string& name() const { return name_; }
  /// Decoded character data of the current Text event.
  const std::string& text() const { return text_; }
  std::optional<std::string> attr(std::string_view local_name) const;
  std::size_t depth() const { return stack_.size(); }

  /// Concatenated text of the current element's subtree; leaves the reader
  /// positioned on the element's End event. Call right after a Start event.
  std::string read_text();

  /// Skips to the End event of the element opened by the last Start event.
  void skip_element();

 private:
  void parse_tag();
  void fail(const std::string& why) const;

  std::string_view xml_;
  std::size_t pos_ = 0;
  std::string name_;
  std::string text_;
  std::vector<std::pair<std::string, std::string>> attrs_;
  std::vector<std::string> stack_;
  bool pending_end_ = false;
};

std::string xml_decode(std::string_view raw);

}  // namespace cellvault::detail
