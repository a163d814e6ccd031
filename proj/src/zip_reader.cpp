#include "zip_reader.hpp"

#include <zlib.h>

#include "cellvault/error.hpp"

namespace cellvault::detail {
namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

[[noreturn]] void bad_zip(const std::string& why) {
  throw Error(ErrorCode::FormatError, "not a readable ZIP package: " + why);
}

std::uint16_t u16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) bad_zip("truncated");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(u16(b, at)) | (static_cast<std::uint32_t>(u16(b, at + 2)) << 16);
}

std::string inflate_raw(std::string_view in, std::size_t expected) {
  // One spare byte so an empty stream can still report Z_STREAM_END and an
  // overlong one is detected.
  std::string out(expected + 1, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) bad_zip("inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) bad_zip("corrupt deflate stream");
  out.resize(expected);
  return out;
}

}  // namespace

ZipReader::ZipReader(std::string_view bytes) : bytes_(bytes) {
  if (bytes.size() < 22) bad_zip("too short");
  // The end-of-central-directory record sits within the last 64 KiB + 22 bytes.
  std::size_t lowest = bytes.size() > 65557 ? bytes.size() - 65557 : 0;
  std::optional<std::size_t> eocd;
  for (std::size_t at = bytes.size() - 22 + 1; at-- > lowest;) {
    if (u32(bytes, at) == kEndOfCentralDir) {
      eocd = at;
      break;
    }
  }
  if (!eocd) bad_zip("no end-of-central-directory record");
  std::uint16_t count = u16(bytes, *eocd + 10);
  std::uint32_t cd_offset = u32(bytes, *eocd + 16);
  if (count == 0xFFFF || cd_offset == 0xFFFFFFFF) {
    throw Error(ErrorCode::UnsupportedFeature, "ZIP64 packages are not supported");
  }

  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (u32(bytes, at) != kCentralHeader) bad_zip("bad central directory entry");
    std::uint16_t flags = u16(bytes, at + 8);
    Entry e;
    e.method = u16(bytes, at + 10);
    e.crc = u32(bytes, at + 16);
    e.compressed_size = u32(bytes, at + 20);
    e.uncompressed_size = u32(bytes, at + 24);
    std::uint16_t name_len = u16(bytes, at + 28);
    std::uint16_t extra_len = u16(bytes, at + 30);
    std::uint16_t comment_len = u16(bytes, at + 32);
    e.local_header_offset = u32(bytes, at + 42);
    if (at + 46 + name_len > bytes.size()) bad_zip("truncated central directory");
    std::string name(bytes.substr(at + 46, name_len));
    if (flags & 0x1) throw Error(ErrorCode::UnsupportedFeature, "encrypted ZIP entry '" + name + "'");
    if (e.compressed_size == 0xFFFFFFFF || e.uncompressed_size == 0xFFFFFFFF) {
      throw Error(ErrorCode::UnsupportedFeature, "ZIP64 entry '" + name + "'");
    }
    entries_.emplace(std::move(name), e);
    at += 46 + name_len + extra_len + comment_len;
  }
}

std::optional<std::string> ZipReader::read(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return std::nullopt;
  const Entry& e = it->second;
  std::size_t at = e.local_header_offset;
  if (u32(bytes_, at) != kLocalHeader) bad_zip("bad local header for '" + name + "'");
  std::size_t data = at + 30 + u16(bytes_, at + 26) + u16(bytes_, at + 28);
  if (data + e.compressed_size > bytes_.size()) bad_zip("truncated entry '" + name + "'");
  std::string_view raw = bytes_.substr(data, e.compressed_size);

  std::string out;
  if (e.method == 0) {
    out = std::string(raw);
  } else if (e.method == 8) {
    out = inflate_raw(raw, e.uncompressed_size);
  } else {
    throw Error(ErrorCode::UnsupportedFeature,
                "ZIP compression method " + std::to_string(e.method) + " for '" + name + "'");
  }
  auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
  if (crc != e.crc) bad_zip("CRC mismatch for '" + name + "'");
  return out;
}

}  // namespace cellvault::detail
