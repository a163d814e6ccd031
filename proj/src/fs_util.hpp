#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cellvault::detail {

namespace fs = std::filesystem;

/// Whole-file read. Throws NotFound when the file does not exist and
/// StoreCorrupt on other read failures.
std::string read_file(const fs::path& path);

/// Writes via a temporary sibling, fsync and rename.
void write_file_atomic(const fs::path& path, std::string_view bytes);

/// Appends `line` plus LF with O_APPEND and fsync.
void append_line(const fs::path& path, std::string_view line);

/// LF-terminated lines of a JSON-lines file; empty when the file is absent.
/// Throws StoreCorrupt when the last line is not terminated.
std::vector<std::string> read_lines(const fs::path& path);

/// Exclusive advisory lock on a lock file (flock), released on destruction.
class FileLock {
 public:
  /// Throws ConcurrentWriter when the lock is still held after `timeout`.
  FileLock(const fs::path& path, std::chrono::milliseconds timeout);
  ~FileLock();
  FileLock(FileLock&& other) noexcept;
  FileLock& operator=(FileLock&&) = delete;
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace cellvault::detail
