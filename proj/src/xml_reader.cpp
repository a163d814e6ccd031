#include "xml_reader.hpp"

#include <cctype>
#include <charconv>

#include "cellvault/error.hpp"

namespace cellvault::detail {
namespace {

std::string local_part(std::string_view qname) {
  auto colon = qname.find(':');
  return std::string(colon == std::string_view::npos ? qname : qname.substr(colon + 1));
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_space(char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; }

}  // namespace

std::string xml_decode(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out += raw[i];
      continue;
    }
    auto semi = raw.find(';', i);
    if (semi == std::string_view::npos) throw Error(ErrorCode::FormatError, "XML: unterminated entity");
    std::string_view ent = raw.substr(i + 1, semi - i - 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      std::string_view digits = ent.substr(hex ? 2 : 1);
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || cp > 0x10FFFF) {
        throw Error(ErrorCode::FormatError, "XML: bad character reference &" + std::string(ent) + ";");
      }
      append_utf8(out, cp);
    } else {
      throw Error(ErrorCode::FormatError, "XML: unknown entity &" + std::string(ent) + ";");
    }
    i = semi;
  }
  return out;
}

void XmlReader::fail(const std::string& why) const {
  throw Error(ErrorCode::FormatError, "XML: " + why + " at offset " + std::to_string(pos_));
}

std::optional<std::string> XmlReader::attr(std::string_view local_name) const {
  for (const auto& [k, v] : attrs_) {
    if (k == local_name) return v;
  }
  return std::nullopt;
}

XmlReader::Event XmlReader::next() {
  if (pending_end_) {
    pending_end_ = false;
    stack_.pop_back();
    return Event::End;
  }
  while (pos_ < xml_.size()) {
    if (xml_[pos_] != '<') {
      auto lt = xml_.find('<', pos_);
      if (lt == std::string_view::npos) lt = xml_.size();
      std::string_view raw = xml_.substr(pos_, lt - pos_);
      pos_ = lt;
      if (stack_.empty()) continue;  // whitespace outside the root
      text_ = xml_decode(raw);
      return Event::Text;
    }
    std::string_view rest = xml_.substr(pos_);
    if (rest.starts_with("<!--")) {
      auto end = xml_.find("-->", pos_ + 4);
      if (end == std::string_view::npos) fail("unterminated comment");
      pos_ = end + 3;
      continue;
    }
    if (rest.starts_with("<![CDATA[")) {
      auto end = xml_.find("]]>", pos_ + 9);
      if (end == std::string_view::npos) fail("unterminated CDATA");
      text_ = std::string(xml_.substr(pos_ + 9, end - pos_ - 9));
      pos_ = end + 3;
      return Event::Text;
    }
    if (rest.starts_with("<?")) {
      auto end = xml_.find("?>", pos_ + 2);
      if (end == std::string_view::npos) fail("unterminated processing instruction");
      pos_ = end + 2;
      continue;
    }
    if (rest.starts_with("<!")) {
      auto end = xml_.find('>', pos_ + 2);
      if (end == std::string_view::npos) fail("unterminated declaration");
      pos_ = end + 1;
      continue;
    }
    if (rest.starts_with("</")) {
      auto end = xml_.find('>', pos_ + 2);
      if (end == std::string_view::npos) fail("unterminated end tag");
      std::string_view qname = xml_.substr(pos_ + 2, end - pos_ - 2);
      while (!qname.empty() && is_space(qname.back())) qname.remove_suffix(1);
      name_ = local_part(qname);
      if (stack_.empty() || stack_.back() != name_) fail("mismatched end tag </" + std::string(qname) + ">");
      stack_.pop_back();
      pos_ = end + 1;
      return Event::End;
    }
    parse_tag();
    return Event::Start;
  }
  if (!stack_.empty()) fail("unexpected end of document inside <" + stack_.back() + ">");
  return Event::Eof;
}

void XmlReader::parse_tag() {
  std::size_t i = pos_ + 1;
  std::size_t start = i;
  while (i < xml_.size() && !is_space(xml_[i]) && xml_[i] != '>' && xml_[i] != '/') ++i;
  if (i == start) fail("empty tag name");
  name_ = local_part(xml_.substr(start, i - start));
  attrs_.clear();
  for (;;) {
    while (i < xml_.size() && is_space(xml_[i])) ++i;
    if (i >= xml_.size()) fail("unterminated start tag");
    if (xml_[i] == '>') {
      ++i;
      break;
    }
    if (xml_[i] == '/') {
      if (i + 1 >= xml_.size() || xml_[i + 1] != '>') fail("malformed empty-element tag");
      i += 2;
      pending_end_ = true;
      break;
    }
    std::size_t key_start = i;
    while (i < xml_.size() && xml_[i] != '=' && !is_space(xml_[i]) && xml_[i] != '>') ++i;
    std::string key = local_part(xml_.substr(key_start, i - key_start));
    while (i < xml_.size() && is_space(xml_[i])) ++i;
    if (i >= xml_.size() || xml_[i] != '=') fail("attribute without value");
    ++i;
    while (i < xml_.size() && is_space(xml_[i])) ++i;
    if (i >= xml_.size() || (xml_[i] != '"' && xml_[i] != '\'')) fail("unquoted attribute value");
    char quote = xml_[i++];
    auto close = xml_.find(quote, i);
    if (close == std::string_view::npos) fail("unterminated attribute value");
    attrs_.emplace_back(std::move(key), xml_decode(xml_.substr(i, close - i)));
    i = close + 1;
  }
  pos_ = i;
  stack_.push_back(name_);
}

std::string XmlReader::read_text() {
  std::string out;
  std::size_t target = stack_.size();
  for (;;) {
    Event ev = next();
    if (ev == Event::Text) out += text_;
    else if (ev == Event::End && stack_.size() < target) return out;
    else if (ev == Event::Eof) fail("unexpected end of document");
  }
}

void XmlReader::skip_element() {
  std::size_t target = stack_.size();
  for (;;) {
    Event ev = next();
    if (ev == Event::End && stack_.size() < target) return;
    if (ev == Event::Eof) fail("unexpected end of document");
  }
}

}  // namespace cellvault::detail
