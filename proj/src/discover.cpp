#include "cellvault/discover.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <system_error>

#include "cellvault/error.hpp"

namespace cellvault {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kMiB = 1024 * 1024;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string format_mtime(const struct stat& st) {
  std::tm tm{};
  time_t t = st.st_mtim.tv_sec;
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Returns false when the file cannot be read.
bool read_head(const fs::path& path, std::string& head) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  head.assign(8, '\0');
  in.read(head.data(), 8);
  head.resize(static_cast<std::size_t>(in.gcount()));
  return true;
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.compare(0, prefix.size(), prefix) == 0; }

}  // namespace

SizeBucket size_bucket(std::uint64_t bytes) {
  if (bytes < kMiB) return SizeBucket::Under1MiB;
  if (bytes < 10 * kMiB) return SizeBucket::From1To10MiB;
  if (bytes <= 150 * kMiB) return SizeBucket::From10To150MiB;
  return SizeBucket::Over150MiB;
}

const char* to_string(SizeBucket bucket) {
  switch (bucket) {
    case SizeBucket::Under1MiB: return "lt_1mib";
    case SizeBucket::From1To10MiB: return "1mib_10mib";
    case SizeBucket::From10To150MiB: return "10mib_150mib";
    case SizeBucket::Over150MiB: return "gt_150mib";
  }
  return "?";
}

InventoryReport discover(const fs::path& root, const DiscoverOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::PathNotFound, "not a directory: " + root.string());
  }
  InventoryReport report;
  report.root = root.string();

  std::vector<fs::path> pending{root};
  while (!pending.empty()) {
    fs::path dir = std::move(pending.back());
    pending.pop_back();
    fs::directory_iterator it(dir, ec), end;
    if (ec) {
      report.warnings.push_back("cannot read directory " + dir.string() + ": " + ec.message());
      continue;
    }
    for (; it != end; it.increment(ec)) {
      if (ec) break;
      const fs::path& path = it->path();
      ++report.scanned_paths;
      struct stat st {};
      if (::lstat(path.c_str(), &st) != 0) {
        report.warnings.push_back("cannot stat " + path.string());
        continue;
      }
      if (S_ISDIR(st.st_mode)) {
        pending.push_back(path);
        continue;
      }
      if (!S_ISREG(st.st_mode)) continue;

      std::string ext = lower(path.extension().string());
      if (std::find(options.extensions.begin(), options.extensions.end(), ext) == options.extensions.end()) continue;

      std::string head;
      if (!read_head(path, head)) {
        report.warnings.push_back("cannot read " + path.string());
        continue;
      }
      std::string format = "unknown";
      if (starts_with(head, "PK\x03\x04")) {
        format = "ooxml";
      } else if (starts_with(head, "\xD0\xCF\x11\xE0\xA1\xB1\x1A\xE1")) {
        format = "ole2";
      } else if (ext == ".csv") {
        format = "csv";
      }
      if (ext == ".xlsx" && format != "ooxml") {
        report.warnings.push_back("skipped " + path.string() + ": no ZIP signature");
        continue;
      }

      InventoryFile file;
      file.path = path.lexically_relative(root).generic_string();
      file.bytes = static_cast<std::uint64_t>(st.st_size);
      file.modified = format_mtime(st);
      file.format = format;
      report.total_bytes += file.bytes;
      ++report.histogram[static_cast<std::size_t>(size_bucket(file.bytes))];
      report.spreadsheet_files.push_back(std::move(file));
      if (options.max_files && report.spreadsheet_files.size() >= options.max_files) {
        report.warnings.push_back("stopped after " + std::to_string(options.max_files) + " files");
        pending.clear();
        break;
      }
    }
    if (ec) report.warnings.push_back("error while reading " + dir.string() + ": " + ec.message());
  }
  std::sort(report.spreadsheet_files.begin(), report.spreadsheet_files.end(),
            [](const InventoryFile& a, const InventoryFile& b) { return a.path < b.path; });
  return report;
}

}  // namespace cellvault
