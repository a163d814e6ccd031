#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cellvault/clock.hpp"
#include "cellvault/diff.hpp"
#include "cellvault/snapshot.hpp"

namespace cvtest {

using namespace cellvault;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Deterministic clock: 2026-01-01T00:00:00.000Z plus one second per call.
Clock counting_clock();

Cell num(double v, std::optional<std::string> formula = std::nullopt);
Cell txt(std::string v, std::optional<std::string> formula = std::nullopt);

/// Builds a one-sheet snapshot from (row, col, cell) triples.
struct CellSpec {
  std::uint32_t row;
  std::uint32_t col;
  Cell cell;
};
Sheet make_sheet(const std::string& name, const std::vector<CellSpec>& cells);
WorkbookSnapshot one_sheet(const std::string& name, const std::vector<CellSpec>& cells);
/// Single sheet "S" holding A1 = v.
WorkbookSnapshot single_value(double v);

/// Random snapshot: up to `max_sheets` sheets from a fixed name pool, cells
/// within a `dim` x `dim` grid, every value type, some formulas.
WorkbookSnapshot random_snapshot(std::mt19937_64& rng, int max_sheets = 3, std::uint32_t dim = 20);
/// Random edit of `base`: changes, inserts and deletes some cells, sometimes
/// adds or drops a sheet.
WorkbookSnapshot mutate(std::mt19937_64& rng, const WorkbookSnapshot& base, std::uint32_t dim = 20);
CellValue random_value(std::mt19937_64& rng);

/// Brute-force diff: compares every position of the union grid of every
/// sheet present on either side, independently of the library's merge walk.
ChangeSet brute_force_diff(const WorkbookSnapshot& a, const WorkbookSnapshot& b);

/// Minimal ZIP archive writer (stored entries only).
std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries);

/// Exact statistics, correctly rounded to double, from pairwise formulas
/// evaluated in rational arithmetic.
double exact_variance(const std::vector<double>& x);
double exact_covariance(const std::vector<double>& a, const std::vector<double>& b);
double exact_slope(const std::vector<double>& y);
double exact_mean(const std::vector<double>& x);

/// Path of the built `cellvault` executable and the fixtures directory.
std::filesystem::path cli_binary();
std::filesystem::path fixtures_dir();

/// Runs a shell command; returns exit status and captured stdout.
std::pair<int, std::string> run_command(const std::string& command);

}  // namespace cvtest
