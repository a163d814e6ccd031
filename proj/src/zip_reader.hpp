#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace cellvault::detail {

/// Read-only view of a ZIP archive held in memory. Supports stored and
/// deflated entries; ZIP64 and encrypted entries are rejected.
class ZipReader {
 public:
  /// Throws FormatError for anything that is not a readable ZIP and
  /// UnsupportedFeature for encryption or ZIP64.
  explicit ZipReader(std::string_view bytes);

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  /// Decompressed entry contents, CRC-checked. nullopt when absent.
  std::optional<std::string> read(const std::string& name) const;

 private:
  struct Entry {
    std::uint16_t method = 0;
    std::uint32_t crc = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    std::uint32_t local_header_offset = 0;
  };

  std::string_view bytes_;
  std::map<std::string, Entry> entries_;
};

}  // namespace cellvault::detail
