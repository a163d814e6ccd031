#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cellvault/alerts.hpp"
#include "cellvault/analytics.hpp"
#include "cellvault/audit.hpp"
#include "cellvault/diff.hpp"
#include "cellvault/version_store.hpp"

namespace cellvault {

/// Everything a commit reports back to the caller.
struct CommitOutcome {
  CommitRecord record;
  ChangeSet changes;
  DiffSummary summary;
  std::vector<AlertFiring> firings;
};

/// The operations shared by the CLI and the HTTP service. Each mutating
/// call runs under the workbook's writer lock and writes exactly one audit
/// entry: commit, rule.add, restore, manifest.add and verify.
class Repository {
 public:
  explicit Repository(VersionStore store) : store_(std::move(store)) {}

  VersionStore& store() { return store_; }
  const VersionStore& store() const { return store_; }

  /// Stores the snapshot, diffs it against its parent (classified with
  /// `watch`), evaluates the workbook's rules and persists the firings.
  CommitOutcome commit(const std::string& workbook_id, const WorkbookSnapshot& snapshot, const std::string& author,
                       const std::string& message, const std::string& source, const WatchConfig& watch = {});

  /// Throws RuleInvalid, DuplicateRuleId.
  std::string add_rule(const std::string& workbook_id, const AlertRule& rule, const std::string& actor);
  std::vector<AlertRule> rules(const std::string& workbook_id) const;
  std::vector<AlertFiring> alerts(const std::string& workbook_id) const;

  /// Classified changes between two commits of the lineage (ids or "latest").
  ChangeSet diff(const std::string& workbook_id, const std::string& from, const std::string& to,
                 const WatchConfig& watch = {}) const;

  /// Canonical bytes of a past version; audited as "restore".
  std::string restore(const std::string& workbook_id, const std::string& commit_id, const std::string& actor);

  /// Throws ManifestInvalid (including a duplicate id or a manifest bound to
  /// another workbook).
  void add_manifest(const std::string& workbook_id, const ChangeManifest& manifest, const std::string& actor);
  /// Throws NotFound.
  ChangeManifest manifest(const std::string& workbook_id, const std::string& manifest_id) const;

  /// Verifies the changes of the commit range (from, to] against the
  /// manifest; audited as "verify". `to` defaults to the latest commit and
  /// `from` to its parent. Multi-commit ranges union the per-transition
  /// changes, keeping the most recent record per address.
  ComplianceReport verify(const std::string& workbook_id, const ChangeManifest& manifest,
                          const std::optional<std::string>& from, const std::optional<std::string>& to,
                          const std::string& actor);

  std::vector<AuditEntry> audit(const std::string& workbook_id, const AuditFilter& filter = {}) const;

 private:
  void audit_append(const std::string& workbook_id, const std::string& actor, const std::string& action,
                    const std::string& target);

  VersionStore store_;
};

}  // namespace cellvault
