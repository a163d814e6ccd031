#include <gtest/gtest.h>
#include <unistd.h>

#include <fstream>
#include <map>

#include "cellvault/discover.hpp"
#include "cellvault/error.hpp"
#include "cellvault/sha256.hpp"
#include "support.hpp"

using namespace cellvault;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << bytes;
}

const std::string kZip = std::string("PK\x03\x04", 4) + "rest";
const std::string kOle = std::string("\xD0\xCF\x11\xE0\xA1\xB1\x1A\xE1", 8) + "rest";

// Digest over every path, size, mtime and content below `root`.
std::string tree_digest(const fs::path& root) {
  std::map<std::string, std::string> parts;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    std::string key = e.path().lexically_relative(root).generic_string();
    std::string val = std::to_string(e.last_write_time().time_since_epoch().count());
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      val += std::string(std::istreambuf_iterator<char>(in), {});
    }
    parts[key] = val;
  }
  std::string all;
  for (const auto& [k, v] : parts) all += k + '\0' + sha256_hex(v) + '\n';
  return sha256_hex(all);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::StoreCorrupt;
}

}  // namespace

TEST(Discover, FindsMatchingFilesOnly) {
  cvtest::TempDir dir;
  write(dir / "a.xlsx", kZip);
  write(dir / "sub/b.csv", "1,2\n");
  write(dir / "sub/deeper/c.XLS", kOle);
  write(dir / "notes.txt", "hello");
  write(dir / "sub/image.png", "png");
  auto r = discover(dir.path());
  ASSERT_EQ(r.spreadsheet_files.size(), 3u);
  EXPECT_EQ(r.spreadsheet_files[0].path, "a.xlsx");
  EXPECT_EQ(r.spreadsheet_files[0].format, "ooxml");
  EXPECT_EQ(r.spreadsheet_files[1].path, "sub/b.csv");
  EXPECT_EQ(r.spreadsheet_files[1].format, "csv");
  EXPECT_EQ(r.spreadsheet_files[2].path, "sub/deeper/c.XLS");
  EXPECT_EQ(r.spreadsheet_files[2].format, "ole2");
  EXPECT_EQ(r.total_bytes, kZip.size() + 4 + kOle.size());
  EXPECT_EQ(r.histogram[0], 3u);
  EXPECT_EQ(r.scanned_paths, 7u);  // five files and two directories
  EXPECT_TRUE(r.warnings.empty());
  for (const auto& f : r.spreadsheet_files) EXPECT_EQ(f.modified.size(), 20u) << f.modified;
}

TEST(Discover, EmptyDirectory) {
  cvtest::TempDir dir;
  auto r = discover(dir.path());
  EXPECT_TRUE(r.spreadsheet_files.empty());
  EXPECT_EQ(r.total_bytes, 0u);
  EXPECT_EQ(r.scanned_paths, 0u);
  for (auto n : r.histogram) EXPECT_EQ(n, 0u);
}

TEST(Discover, MissingRootIsPathNotFound) {
  cvtest::TempDir dir;
  EXPECT_EQ(code_of([&] { discover(dir / "missing"); }), ErrorCode::PathNotFound);
  write(dir / "file.csv", "x");
  EXPECT_EQ(code_of([&] { discover(dir / "file.csv"); }), ErrorCode::PathNotFound);
}

TEST(Discover, XlsxWithoutZipSignatureIsSkippedWithWarning) {
  cvtest::TempDir dir;
  write(dir / "fake.xlsx", "not a zip");
  write(dir / "real.xlsx", kZip);
  auto r = discover(dir.path());
  ASSERT_EQ(r.spreadsheet_files.size(), 1u);
  EXPECT_EQ(r.spreadsheet_files[0].path, "real.xlsx");
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("fake.xlsx"), std::string::npos);
}

TEST(Discover, DoesNotFollowSymlinks) {
  cvtest::TempDir dir;
  write(dir / "outside/x.csv", "1");
  write(dir / "root/y.csv", "2");
  fs::create_directory_symlink(dir / "outside", dir / "root/link");
  fs::create_symlink(dir / "outside/x.csv", dir / "root/z.csv");
  auto r = discover(dir / "root");
  ASSERT_EQ(r.spreadsheet_files.size(), 1u);
  EXPECT_EQ(r.spreadsheet_files[0].path, "y.csv");
}

TEST(Discover, ExtensionFilterAndLimit) {
  cvtest::TempDir dir;
  for (int i = 0; i < 5; ++i) write(dir / ("f" + std::to_string(i) + ".csv"), "1");
  write(dir / "g.xlsx", kZip);
  DiscoverOptions only_csv;
  only_csv.extensions = {".csv"};
  EXPECT_EQ(discover(dir.path(), only_csv).spreadsheet_files.size(), 5u);
  DiscoverOptions limited;
  limited.max_files = 2;
  EXPECT_EQ(discover(dir.path(), limited).spreadsheet_files.size(), 2u);
}

TEST(Discover, IsReadOnly) {
  cvtest::TempDir dir;
  write(dir / "a.xlsx", kZip);
  write(dir / "b/c.csv", "1,2");
  write(dir / "b/d.txt", "x");
  auto before = tree_digest(dir.path());
  discover(dir.path());
  discover(dir.path());
  EXPECT_EQ(tree_digest(dir.path()), before);
}

TEST(Discover, TenThousandFilesMatchFindCount) {
  cvtest::TempDir dir;
  for (int d = 0; d < 100; ++d) {
    auto sub = dir / ("d" + std::to_string(d));
    fs::create_directories(sub);
    for (int f = 0; f < 100; ++f) {
      const char* ext = f % 3 == 0 ? ".csv" : f % 3 == 1 ? ".txt" : ".xls";
      std::ofstream(sub / ("f" + std::to_string(f) + ext)) << "x";
    }
  }
  auto r = discover(dir.path());
  auto [status, out] = cvtest::run_command("find '" + dir.path().string() +
                                           "' -type f \\( -iname '*.csv' -o -iname '*.xls' \\) | wc -l");
  ASSERT_EQ(status, 0);
  EXPECT_EQ(r.spreadsheet_files.size(), std::stoul(out));
  EXPECT_EQ(r.scanned_paths, 10100u);
}

TEST(Discover, UnreadableDirectoryBecomesWarning) {
  if (geteuid() == 0) GTEST_SKIP() << "permission bits do not restrict root";
  cvtest::TempDir dir;
  write(dir / "locked/x.csv", "1");
  write(dir / "open/y.csv", "1");
  fs::permissions(dir / "locked", fs::perms::none);
  auto r = discover(dir.path());
  fs::permissions(dir / "locked", fs::perms::owner_all);
  EXPECT_EQ(r.spreadsheet_files.size(), 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(SizeBucket, Boundaries) {
  constexpr std::uint64_t MiB = 1024 * 1024;
  EXPECT_EQ(size_bucket(0), SizeBucket::Under1MiB);
  EXPECT_EQ(size_bucket(MiB - 1), SizeBucket::Under1MiB);
  EXPECT_EQ(size_bucket(MiB), SizeBucket::From1To10MiB);
  EXPECT_EQ(size_bucket(10 * MiB - 1), SizeBucket::From1To10MiB);
  EXPECT_EQ(size_bucket(10 * MiB), SizeBucket::From10To150MiB);
  EXPECT_EQ(size_bucket(150 * MiB), SizeBucket::From10To150MiB);
  EXPECT_EQ(size_bucket(150 * MiB + 1), SizeBucket::Over150MiB);
  EXPECT_STREQ(to_string(SizeBucket::From10To150MiB), "10mib_150mib");
}
