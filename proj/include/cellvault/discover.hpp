#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cellvault {

struct InventoryFile {
  std::string path;      // relative to the scanned root, '/' separated
  std::uint64_t bytes = 0;
  std::string modified;  // RFC-3339 UTC, second precision
  std::string format;    // "ooxml", "ole2", "csv" or "unknown"
};

/// Size bands: <1 MiB, 1-10 MiB, 10-150 MiB (inclusive), >150 MiB.
enum class SizeBucket { Under1MiB, From1To10MiB, From10To150MiB, Over150MiB };
SizeBucket size_bucket(std::uint64_t bytes);
const char* to_string(SizeBucket bucket);

struct InventoryReport {
  std::string root;
  std::uint64_t scanned_paths = 0;  // entries visited below the root
  std::vector<InventoryFile> spreadsheet_files;  // sorted by path
  std::uint64_t total_bytes = 0;
  std::array<std::uint64_t, 4> histogram{};  // indexed by SizeBucket
  std::vector<std::string> warnings;
};

struct DiscoverOptions {
  /// Lowercase, with the leading dot; matched case-insensitively.
  std::vector<std::string> extensions{".xlsx", ".xls", ".csv"};
  /// Upper bound on reported files; 0 means unlimited.
  std::size_t max_files = 0;
};

/// Read-only recursive walk that never follows symlinks. .xlsx files are
/// kept only when they start with a ZIP signature. Unreadable directories
/// and files become warnings. Throws PathNotFound when `root` is not a
/// directory.
InventoryReport discover(const std::filesystem::path& root, const DiscoverOptions& options = {});

}  // namespace cellvault
