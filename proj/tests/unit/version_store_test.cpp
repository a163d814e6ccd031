#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "cellvault/canonical.hpp"
#include "cellvault/error.hpp"
#include "cellvault/ingest.hpp"
#include "cellvault/sha256.hpp"
#include "cellvault/version_store.hpp"
#include "support.hpp"

using namespace cellvault;
namespace fs = std::filesystem;

namespace {

class StoreTest : public ::testing::Test {
 protected:
  StoreTest() : store(VersionStore::init(dir / "store")) { store.set_clock(cvtest::counting_clock()); }

  CommitRecord put(const WorkbookSnapshot& s, const std::string& wid = "wb") {
    return store.commit(wid, s, "alice", "m", "test");
  }

  std::vector<fs::path> object_files() const {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(store.root() / "objects")) {
      if (e.is_regular_file()) out.push_back(e.path());
    }
    return out;
  }

  cvtest::TempDir dir;
  VersionStore store;
};

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

TEST_F(StoreTest, FirstCommitHasNoParent) {
  auto rec = put(cvtest::single_value(1));
  EXPECT_FALSE(rec.parent);
  EXPECT_EQ(rec.workbook_id, "wb");
  EXPECT_EQ(rec.author, "alice");
  EXPECT_EQ(rec.timestamp, "2026-01-01T00:00:00.000Z");
  EXPECT_EQ(rec.snapshot, snapshot_hash(cvtest::single_value(1)));
  EXPECT_EQ(rec.commit_id, compute_commit_id(rec));
  EXPECT_TRUE(is_sha256_hex(rec.commit_id));
}

TEST_F(StoreTest, RejectsEmptyAuthorAndBadWorkbookIds) {
  EXPECT_EQ(code_of([&] { store.commit("wb", WorkbookSnapshot{}, "", "", ""); }), ErrorCode::ConstraintError);
  for (const char* bad : {"", ".hidden", "a/b", "..", "sp ace"}) {
    EXPECT_EQ(code_of([&] { put(WorkbookSnapshot{}, bad); }), ErrorCode::ConstraintError) << bad;
  }
  EXPECT_TRUE(is_valid_workbook_id("Budget_2026.v1-final"));
  EXPECT_FALSE(is_valid_workbook_id(std::string(129, 'a')));
}

TEST_F(StoreTest, CommittingSameSnapshotTwiceWritesNoNewObjects) {
  auto s = cvtest::one_sheet("S", {{1, 1, cvtest::num(1)}, {2, 2, cvtest::txt("x")}});
  auto a = put(s);
  auto count = store.object_count();
  auto bytes = store.object_bytes();
  EXPECT_EQ(count, 2u);  // one sheet blob plus the snapshot manifest
  auto b = put(s);
  EXPECT_EQ(a.snapshot, b.snapshot);
  EXPECT_NE(a.commit_id, b.commit_id);
  EXPECT_EQ(store.object_count(), count);
  EXPECT_EQ(store.object_bytes(), bytes);
}

TEST_F(StoreTest, DedupAcrossManyCommits) {
  std::mt19937_64 rng(41);
  auto s = cvtest::random_snapshot(rng);
  put(s);
  auto bytes = store.object_bytes();
  for (int i = 0; i < 20; ++i) put(s);
  EXPECT_EQ(store.object_bytes(), bytes);
  EXPECT_EQ(store.log("wb").size(), 21u);
}

TEST_F(StoreTest, UnchangedSheetsShareBlobs) {
  auto a = WorkbookSnapshot(std::vector<Sheet>{cvtest::make_sheet("A", {{1, 1, cvtest::num(1)}}),
                                               cvtest::make_sheet("B", {{1, 1, cvtest::num(2)}})});
  auto b = WorkbookSnapshot(std::vector<Sheet>{cvtest::make_sheet("A", {{1, 1, cvtest::num(1)}}),
                                               cvtest::make_sheet("B", {{1, 1, cvtest::num(3)}})});
  put(a);
  auto before = store.object_count();
  put(b);
  EXPECT_EQ(store.object_count(), before + 2);  // new blob for B and a new manifest
}

TEST_F(StoreTest, LogChainsParents) {
  std::vector<CommitRecord> made;
  for (int i = 0; i < 3; ++i) made.push_back(put(cvtest::single_value(i)));
  auto log = store.log("wb");
  ASSERT_EQ(log, made);
  for (std::size_t i = 1; i < log.size(); ++i) EXPECT_EQ(log[i].parent, log[i - 1].commit_id);
  EXPECT_EQ(code_of([&] { store.log("nope"); }), ErrorCode::NotFound);
  EXPECT_EQ(store.find_commit("wb", "latest"), made.back());
  EXPECT_EQ(store.find_commit("wb", made[0].commit_id), made[0]);
  EXPECT_EQ(code_of([&] { store.find_commit("wb", std::string(64, 'a')); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, LogIsIsolatedPerWorkbook) {
  put(cvtest::single_value(1), "a");
  put(cvtest::single_value(2), "b");
  put(cvtest::single_value(3), "a");
  EXPECT_EQ(store.log("a").size(), 2u);
  EXPECT_EQ(store.log("b").size(), 1u);
  EXPECT_EQ(store.workbooks(), (std::vector<std::string>{"a", "b"}));
}

TEST_F(StoreTest, ReopenedStoreSeesSameLineage) {
  auto rec = put(cvtest::single_value(5));
  VersionStore again(store.root());
  EXPECT_EQ(again.log("wb"), std::vector<CommitRecord>{rec});
  EXPECT_EQ(code_of([&] { VersionStore(dir / "missing"); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, GetSnapshotRoundTrips) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 50; ++i) {
    auto s = cvtest::random_snapshot(rng);
    auto rec = put(s);
    EXPECT_EQ(store.get_snapshot(rec.snapshot), s);
  }
  EXPECT_EQ(code_of([&] { store.get_snapshot(SnapshotHash(std::string(64, 'e'))); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, CorruptedObjectIsDetected) {
  auto rec = put(cvtest::one_sheet("S", {{1, 1, cvtest::num(12345)}}));
  for (const auto& file : object_files()) {
    std::string bytes;
    {
      std::ifstream in(file, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto pos = bytes.find("S");
    ASSERT_NE(pos, std::string::npos);
    bytes[pos] = 'T';
    fs::permissions(file, fs::perms::owner_write, fs::perm_options::add);
    std::ofstream(file, std::ios::binary | std::ios::trunc) << bytes;
  }
  EXPECT_EQ(code_of([&] { store.get_snapshot(rec.snapshot); }), ErrorCode::StoreCorrupt);
  EXPECT_EQ(code_of([&] { store.restore("wb", rec.commit_id); }), ErrorCode::StoreCorrupt);
}

TEST_F(StoreTest, TruncatedObjectIsDetected) {
  auto rec = put(cvtest::one_sheet("S", {{1, 1, cvtest::num(12345)}}));
  for (const auto& file : object_files()) {
    auto size = fs::file_size(file);
    fs::permissions(file, fs::perms::owner_write, fs::perm_options::add);
    fs::resize_file(file, size / 2);
  }
  EXPECT_EQ(code_of([&] { store.get_snapshot(rec.snapshot); }), ErrorCode::StoreCorrupt);
}

TEST_F(StoreTest, HistoryOfFortyFortyFortyFifty) {
  for (double v : {40.0, 40.0, 40.0, 50.0}) put(cvtest::single_value(v));
  auto h = store.cell_history("wb", {"S", 1, 1}, 4);
  ASSERT_EQ(h.points.size(), 4u);
  std::vector<double> values;
  std::vector<bool> changed;
  for (const auto& p : h.points) {
    values.push_back(p.value.as_number());
    changed.push_back(p.changed);
  }
  EXPECT_EQ(values, (std::vector<double>{40, 40, 40, 50}));
  EXPECT_EQ(changed, (std::vector<bool>{true, false, false, true}));
  auto log = store.log("wb");
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(h.points[i].commit_id, log[i].commit_id);

  auto tail = store.cell_history("wb", {"S", 1, 1}, 2);
  ASSERT_EQ(tail.points.size(), 2u);
  EXPECT_EQ(tail.points[0].value.as_number(), 40);
  EXPECT_EQ(tail.points[1].value.as_number(), 50);

  EXPECT_EQ(store.cell_history("wb", {"S", 1, 1}, 100).points.size(), 4u);
}

TEST_F(StoreTest, HistoryOfUnpopulatedCell) {
  for (double v : {1.0, 2.0, 3.0}) put(cvtest::single_value(v));
  for (const CellAddress& addr : {CellAddress{"S", 9, 9}, CellAddress{"Nope", 1, 1}}) {
    auto h = store.cell_history("wb", addr, 5);
    ASSERT_EQ(h.points.size(), 3u);
    for (const auto& p : h.points) {
      EXPECT_TRUE(p.value.is_empty());
      EXPECT_FALSE(p.changed);
      EXPECT_FALSE(p.formula);
    }
  }
}

TEST_F(StoreTest, HistoryTracksFormulaAndErrors) {
  put(cvtest::one_sheet("S", {{1, 1, cvtest::num(1, "=1")}}));
  put(cvtest::one_sheet("S", {{1, 1, cvtest::num(1, "=0+1")}}));
  auto h = store.cell_history("wb", {"S", 1, 1}, 4);
  EXPECT_EQ(h.points[1].formula, "=0+1");
  EXPECT_TRUE(h.points[1].changed);
  EXPECT_EQ(code_of([&] { store.cell_history("wb", {"S", 1, 1}, 0); }), ErrorCode::ConstraintError);
  EXPECT_EQ(code_of([&] { store.cell_history("zz", {"S", 1, 1}, 1); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, HistoryAgreesWithDiff) {
  std::mt19937_64 rng(43);
  auto s = cvtest::random_snapshot(rng, 2, 6);
  std::vector<WorkbookSnapshot> snaps{s};
  for (int i = 0; i < 12; ++i) snaps.push_back(cvtest::mutate(rng, snaps.back(), 6));
  for (const auto& snap : snaps) put(snap);

  std::set<std::string> sheet_names;
  for (const auto& snap : snaps) {
    for (const auto& [name, _] : snap.sheets()) sheet_names.insert(name);
  }
  for (const auto& sheet : sheet_names) {
    for (std::uint32_t r = 1; r <= 6; ++r) {
      for (std::uint32_t c = 1; c <= 6; ++c) {
        CellAddress addr{sheet, r, c};
        auto h = store.cell_history("wb", addr, snaps.size());
        ASSERT_EQ(h.points.size(), snaps.size());
        EXPECT_EQ(h.points[0].changed, snaps[0].find(addr) != nullptr);
        for (std::size_t i = 1; i < snaps.size(); ++i) {
          bool in_diff = false;
          for (const auto& rec : diff(snaps[i - 1], snaps[i])) in_diff = in_diff || rec.address == addr;
          ASSERT_EQ(h.points[i].changed, in_diff) << format_address(addr) << " commit " << i;
        }
      }
    }
  }
}

TEST_F(StoreTest, RestoreFidelity) {
  std::mt19937_64 rng(44);
  std::vector<WorkbookSnapshot> snaps{cvtest::random_snapshot(rng)};
  for (int i = 0; i < 10; ++i) snaps.push_back(cvtest::mutate(rng, snaps.back()));
  for (const auto& s : snaps) put(s);
  auto log = store.log("wb");
  auto objects_before = store.object_bytes();
  for (std::size_t i = 0; i < log.size(); ++i) {
    auto bytes = store.restore("wb", log[i].commit_id);
    EXPECT_EQ(sha256_hex(bytes), log[i].snapshot.hex());
    EXPECT_EQ(bytes, canonicalize(snaps[i]));
  }
  EXPECT_EQ(store.object_bytes(), objects_before);
  EXPECT_EQ(store.log("wb"), log);
}

TEST_F(StoreTest, RestoreOfForeignCommitIsNotFound) {
  auto other = put(cvtest::single_value(1), "other");
  put(cvtest::single_value(2), "wb");
  EXPECT_EQ(code_of([&] { store.restore("wb", other.commit_id); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, ExportRegionOverCsvExample) {
  auto sheet = ingest_csv("S", "1,2\n3,4\n");
  auto rec = put(WorkbookSnapshot(std::vector<Sheet>{sheet}));
  auto t = store.export_region("wb", "latest", parse_region("S!A1:B2"));
  EXPECT_EQ(t.commit_id, rec.commit_id);
  std::vector<std::vector<CellValue>> expected{{CellValue::number(1), CellValue::number(2)},
                                               {CellValue::number(3), CellValue::number(4)}};
  EXPECT_EQ(t.rows, expected);
  EXPECT_EQ(store.export_region("wb", rec.commit_id, parse_region("S!A1:B2")), t);
}

TEST_F(StoreTest, ExportEmptyAreaAndRefresh) {
  auto first = put(cvtest::single_value(1));
  auto t = store.export_region("wb", "latest", parse_region("S!C3:D5"));
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& row : t.rows) {
    ASSERT_EQ(row.size(), 2u);
    for (const auto& v : row) EXPECT_TRUE(v.is_empty());
  }
  put(cvtest::single_value(2));
  EXPECT_EQ(store.export_region("wb", "latest", parse_region("S!A1")).rows[0][0], CellValue::number(2));
  EXPECT_EQ(store.export_region("wb", first.commit_id, parse_region("S!A1")).rows[0][0], CellValue::number(1));
}

TEST_F(StoreTest, ExportDropsFormulas) {
  put(cvtest::one_sheet("S", {{1, 1, cvtest::num(84, "=B1*2")}}));
  auto t = store.export_region("wb", "latest", parse_region("S!A1"));
  EXPECT_EQ(t.rows[0][0], CellValue::number(84));
}

TEST_F(StoreTest, ExportErrors) {
  put(cvtest::single_value(1));
  EXPECT_EQ(code_of([&] { store.export_region("wb", "latest", Region{"S", {2, 2}, {1, 1}}); }),
            ErrorCode::MalformedRegion);
  EXPECT_EQ(code_of([&] { store.export_region("wb", "latest", parse_region("*!A1")); }), ErrorCode::MalformedRegion);
  EXPECT_EQ(code_of([&] { store.export_region("zz", "latest", parse_region("S!A1")); }), ErrorCode::NotFound);
}

TEST_F(StoreTest, ConcurrentWriterTimesOut) {
  put(cvtest::single_value(1));
  auto held = store.lock("wb");
  VersionStore second(store.root());
  second.set_lock_timeout(std::chrono::milliseconds(200));
  EXPECT_EQ(code_of([&] { second.commit("wb", cvtest::single_value(2), "bob", "", ""); }),
            ErrorCode::ConcurrentWriter);
  EXPECT_EQ(store.log("wb").size(), 1u);
}

TEST_F(StoreTest, LockIsReleasedAfterCommit) {
  put(cvtest::single_value(1));
  { auto held = store.lock("wb"); }
  VersionStore second(store.root());
  second.set_lock_timeout(std::chrono::milliseconds(200));
  EXPECT_NO_THROW(second.commit("wb", cvtest::single_value(2), "bob", "", ""));
}

TEST(CommitLine, FixedKeyOrder) {
  CommitRecord r;
  r.commit_id = "id";
  r.workbook_id = "wb";
  r.author = "a";
  r.timestamp = "t";
  r.message = "m";
  r.source = "s";
  EXPECT_EQ(commit_line(r),
            R"({"commit_id":"id","workbook_id":"wb","parent":null,"snapshot":")" + std::string(64, '0') +
                R"(","author":"a","timestamp":"t","message":"m","source":"s"})");
}
