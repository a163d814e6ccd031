#include <gtest/gtest.h>

#include <random>

#include "cellvault/canonical.hpp"
#include "cellvault/error.hpp"
#include "cellvault/repository.hpp"
#include "support.hpp"

using namespace cellvault;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::StoreCorrupt;
}

class RepoTest : public ::testing::Test {
 protected:
  RepoTest() : repo(VersionStore::init(dir / "store")) { repo.store().set_clock(cvtest::counting_clock()); }

  AlertRule threshold_up(double t) {
    AlertRule r;
    r.rule_id = "a1-up";
    r.target = parse_region("S!A1");
    r.kind = RuleKind::ThresholdUp;
    r.threshold = t;
    return r;
  }

  ChangeManifest manifest(std::string id, std::vector<CellAddress> required, std::vector<Region> allowed) {
    ChangeManifest m;
    m.manifest_id = std::move(id);
    m.approver = "ctl";
    m.created = "2026-01-01T00:00:00Z";
    m.applies_to = "wb";
    m.required = std::move(required);
    m.allowed = std::move(allowed);
    return m;
  }

  cvtest::TempDir dir;
  Repository repo;
};

}  // namespace

TEST_F(RepoTest, FirstCommitOfEmptyWorkbook) {
  auto out = repo.commit("wb", WorkbookSnapshot{}, "alice", "init", "test");
  EXPECT_FALSE(out.record.parent);
  EXPECT_TRUE(out.changes.empty());
  EXPECT_EQ(out.summary.total, 0u);
  EXPECT_EQ(out.summary.exceptional_count, 0u);
  EXPECT_TRUE(out.firings.empty());
}

TEST_F(RepoTest, CommitReturnsClassifiedDiffAgainstParent) {
  repo.commit("wb", cvtest::single_value(40), "alice", "", "");
  WatchConfig watch;
  watch.input_regions.push_back(parse_region("S!A1:A10"));
  auto out = repo.commit("wb", cvtest::single_value(50), "alice", "", "", watch);
  ASSERT_EQ(out.changes.size(), 1u);
  EXPECT_EQ(out.changes[0].policy, Policy::Normal);
  EXPECT_EQ(out.summary.by_kind[ChangeKind::ValueChanged], 1u);
  auto unwatched = repo.commit("wb", cvtest::single_value(60), "alice", "", "");
  EXPECT_EQ(unwatched.changes[0].policy, Policy::Exceptional);
}

TEST_F(RepoTest, ThresholdAlertWithStepPattern) {
  repo.commit("wb", cvtest::single_value(40), "alice", "", "");
  repo.add_rule("wb", threshold_up(50), "alice");
  repo.commit("wb", cvtest::single_value(40), "alice", "", "");
  repo.commit("wb", cvtest::single_value(40), "alice", "", "");
  auto out = repo.commit("wb", cvtest::single_value(50), "alice", "", "");
  ASSERT_EQ(out.firings.size(), 1u);
  const auto& f = out.firings[0];
  EXPECT_EQ(f.pattern, PatternLabel::Step);
  EXPECT_EQ(f.commit_id, out.record.commit_id);
  std::vector<CellValue> window{CellValue::number(40), CellValue::number(40), CellValue::number(40),
                                CellValue::number(50)};
  EXPECT_EQ(f.window_values, window);
  EXPECT_EQ(repo.alerts("wb"), out.firings);
  auto again = repo.commit("wb", cvtest::single_value(55), "alice", "", "");
  EXPECT_TRUE(again.firings.empty());
}

TEST_F(RepoTest, ShortHistoryWindow) {
  repo.commit("wb", cvtest::single_value(40), "alice", "", "");
  repo.add_rule("wb", threshold_up(50), "alice");
  auto out = repo.commit("wb", cvtest::single_value(50), "alice", "", "");
  ASSERT_EQ(out.firings.size(), 1u);
  EXPECT_EQ(out.firings[0].window_values.size(), 2u);
  EXPECT_EQ(out.firings[0].pattern, PatternLabel::Step);
}

TEST_F(RepoTest, RuleManagement) {
  EXPECT_EQ(repo.add_rule("wb", threshold_up(50), "alice"), "a1-up");
  EXPECT_EQ(repo.rules("wb"), std::vector<AlertRule>{threshold_up(50)});
  EXPECT_EQ(code_of([&] { repo.add_rule("wb", threshold_up(60), "alice"); }), ErrorCode::DuplicateRuleId);
  auto bad = threshold_up(1);
  bad.rule_id = "bad";
  bad.kind = RuleKind::RangeBreach;
  bad.lo = 2;
  bad.hi = 1;
  EXPECT_EQ(code_of([&] { repo.add_rule("wb", bad, "alice"); }), ErrorCode::RuleInvalid);
  EXPECT_EQ(repo.rules("wb").size(), 1u);
}

TEST_F(RepoTest, EmptyAuthorIsRejected) {
  EXPECT_EQ(code_of([&] { repo.commit("wb", WorkbookSnapshot{}, "", "", ""); }), ErrorCode::ConstraintError);
  EXPECT_FALSE(repo.store().has_workbook("wb"));
}

TEST_F(RepoTest, DiffBetweenCommits) {
  auto a = repo.commit("wb", cvtest::single_value(1), "alice", "", "").record;
  auto b = repo.commit("wb", cvtest::single_value(2), "alice", "", "").record;
  auto changes = repo.diff("wb", a.commit_id, b.commit_id);
  EXPECT_EQ(changes, classify(diff(cvtest::single_value(1), cvtest::single_value(2)), {}));
  EXPECT_EQ(repo.diff("wb", a.commit_id, "latest"), changes);
  EXPECT_EQ(code_of([&] { repo.diff("wb", "nope", "latest"); }), ErrorCode::NotFound);
}

TEST_F(RepoTest, RestoreIsAudited) {
  auto a = repo.commit("wb", cvtest::single_value(1), "alice", "", "").record;
  repo.commit("wb", cvtest::single_value(2), "alice", "", "");
  EXPECT_EQ(repo.restore("wb", a.commit_id, "bob"), canonicalize(cvtest::single_value(1)));
  repo.restore("wb", a.commit_id, "bob");
  AuditFilter f;
  f.action = "restore";
  auto entries = repo.audit("wb", f);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].event.actor, "bob");
  EXPECT_EQ(entries[0].event.target, "wb@" + a.commit_id);
  EXPECT_EQ(code_of([&] { repo.restore("wb", std::string(64, 'b'), "bob"); }), ErrorCode::NotFound);
  EXPECT_EQ(repo.audit("wb", f).size(), 2u);
}

TEST_F(RepoTest, CommitAuditEntryUsesAuthor) {
  auto rec = repo.commit("wb", cvtest::single_value(1), "alice", "", "").record;
  auto entries = repo.audit("wb");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].event.action, "commit");
  EXPECT_EQ(entries[0].event.actor, "alice");
  EXPECT_EQ(entries[0].event.target, "wb@" + rec.commit_id);
}

TEST_F(RepoTest, ManifestsAndVerification) {
  auto base = cvtest::one_sheet("S", {{1, 1, cvtest::num(1)}, {1, 2, cvtest::num(1)}, {5, 5, cvtest::num(1)}});
  auto c1 = repo.commit("wb", base, "alice", "", "").record;
  auto m = manifest("CR-7", {{"S", 1, 1}}, {parse_region("S!A1:B1")});
  repo.add_manifest("wb", m, "ctl");
  EXPECT_EQ(repo.manifest("wb", "CR-7").required, m.required);
  EXPECT_EQ(code_of([&] { repo.add_manifest("wb", m, "ctl"); }), ErrorCode::ManifestInvalid);
  auto foreign = m;
  foreign.manifest_id = "CR-8";
  foreign.applies_to = "other";
  EXPECT_EQ(code_of([&] { repo.add_manifest("wb", foreign, "ctl"); }), ErrorCode::ManifestInvalid);
  EXPECT_EQ(code_of([&] { repo.manifest("wb", "CR-8"); }), ErrorCode::NotFound);

  auto approved = cvtest::one_sheet("S", {{1, 1, cvtest::num(2)}, {1, 2, cvtest::num(1)}, {5, 5, cvtest::num(1)}});
  auto c2 = repo.commit("wb", approved, "alice", "", "").record;
  auto ok = repo.verify("wb", m, std::nullopt, std::nullopt, "ctl");
  EXPECT_TRUE(ok.compliant);
  EXPECT_EQ(ok.from_commit, c1.commit_id);
  EXPECT_EQ(ok.to_commit, c2.commit_id);

  auto sneaky = cvtest::one_sheet("S", {{1, 1, cvtest::num(2)}, {1, 2, cvtest::num(1)}, {5, 5, cvtest::num(9)}});
  auto c3 = repo.commit("wb", sneaky, "alice", "", "").record;
  auto bad = repo.verify("wb", m, std::nullopt, std::nullopt, "ctl");
  EXPECT_FALSE(bad.compliant);
  EXPECT_EQ(bad.unfulfilled, (std::vector<CellAddress>{CellAddress{"S", 1, 1}}));
  ASSERT_EQ(bad.violations.size(), 1u);

  auto range = repo.verify("wb", m, c1.commit_id, c3.commit_id, "ctl");
  EXPECT_FALSE(range.compliant);
  EXPECT_TRUE(range.unfulfilled.empty());
  EXPECT_EQ(range.violations.size(), 1u);
  EXPECT_EQ(range.total_changes, 2u);

  EXPECT_EQ(code_of([&] { repo.verify("wb", m, c3.commit_id, c1.commit_id, "ctl"); }), ErrorCode::ConstraintError);
  AuditFilter f;
  f.action = "verify";
  EXPECT_EQ(repo.audit("wb", f).size(), 3u);
}

TEST_F(RepoTest, VerifyOfFirstCommitDiffsAgainstEmpty) {
  repo.commit("wb", cvtest::single_value(3), "alice", "", "");
  auto m = manifest("CR-1", {{"S", 1, 1}}, {parse_region("S!A1")});
  auto r = repo.verify("wb", m, std::nullopt, std::nullopt, "ctl");
  EXPECT_FALSE(r.compliant);  // the new sheet itself is outside the allowed cells
  EXPECT_TRUE(r.unfulfilled.empty());
  EXPECT_EQ(r.from_commit, "");
}

TEST_F(RepoTest, AuditCompletenessOverRandomOperations) {
  std::mt19937_64 rng(81);
  std::uniform_int_distribution<int> op(0, 4);
  std::size_t mutations = 0;
  auto snap = cvtest::random_snapshot(rng);
  repo.commit("wb", snap, "u0", "", "");
  ++mutations;
  int rule_n = 0, manifest_n = 0;
  for (int i = 0; i < 40; ++i) {
    std::string actor = "u" + std::to_string(i % 3);
    switch (op(rng)) {
      case 0:
      case 1:
        snap = cvtest::mutate(rng, snap);
        repo.commit("wb", snap, actor, "", "");
        break;
      case 2: {
        auto r = threshold_up(i);
        r.rule_id = "r" + std::to_string(rule_n++);
        repo.add_rule("wb", r, actor);
        break;
      }
      case 3:
        repo.restore("wb", repo.store().log("wb").front().commit_id, actor);
        break;
      case 4: {
        auto m = manifest("M" + std::to_string(manifest_n++), {}, {parse_region("Alpha!A1:C3")});
        repo.add_manifest("wb", m, actor);
        repo.verify("wb", m, std::nullopt, std::nullopt, actor);
        ++mutations;
        break;
      }
    }
    ++mutations;
    ASSERT_EQ(repo.audit("wb").size(), mutations);
  }
  AuditLog log(repo.store().workbook_dir("wb") / "audit.jsonl");
  EXPECT_EQ(log.verify(), mutations);
  AuditFilter mine;
  mine.actor = "u1";
  for (const auto& e : repo.audit("wb", mine)) EXPECT_EQ(e.event.actor, "u1");
}

TEST_F(RepoTest, FailedOperationsWriteNoAuditEntry) {
  repo.commit("wb", cvtest::single_value(1), "alice", "", "");
  repo.add_rule("wb", threshold_up(5), "alice");
  EXPECT_THROW(repo.add_rule("wb", threshold_up(5), "alice"), Error);
  EXPECT_THROW(repo.restore("wb", std::string(64, 'c'), "alice"), Error);
  EXPECT_EQ(repo.audit("wb").size(), 2u);
}
