#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cellvault/address.hpp"
#include "cellvault/diff.hpp"

namespace cellvault {

/// An approved change request: `required` cells must change, and nothing
/// outside the `allowed` regions may.
struct ChangeManifest {
  std::string manifest_id;
  std::string approver;
  std::string created;
  std::vector<CellAddress> required;
  std::vector<Region> allowed;
  std::string applies_to;

  /// Throws ManifestInvalid, including when a required cell lies outside
  /// every allowed region.
  void validate() const;
};

struct ComplianceReport {
  std::string manifest_id;
  std::string from_commit;
  std::string to_commit;
  bool compliant = false;
  /// Changes outside every allowed region, in changeset order.
  ChangeSet violations;
  /// Required cells with no change, in manifest order.
  std::vector<CellAddress> unfulfilled;
  std::size_t total_changes = 0;
  std::size_t allowed_changes = 0;
};

/// Pure check of one changeset against a manifest. Any change kind at a
/// required address fulfils it. Throws ManifestInvalid.
ComplianceReport verify_manifest(const ChangeSet& changes, const ChangeManifest& manifest,
                                 const std::string& from_commit = {}, const std::string& to_commit = {});

struct AuditEvent {
  std::string actor;
  std::string action;
  std::string target;
  std::string timestamp;
};

struct AuditEntry {
  std::uint64_t entry_id = 0;
  AuditEvent event;
  /// SHA-256 of the previous line's bytes; 64 zeros for the first entry.
  std::string prev_hash;
};

struct AuditFilter {
  std::optional<std::string> actor;
  std::optional<std::string> action;
  std::optional<std::string> target;
};

/// Hash-chained JSON-lines audit trail (`audit.jsonl`). Appends must be
/// serialized by the caller (the workbook writer lock); reads are lock-free.
class AuditLog {
 public:
  static constexpr const char* kGenesis = "0000000000000000000000000000000000000000000000000000000000000000";

  explicit AuditLog(std::filesystem::path file) : file_(std::move(file)) {}

  /// Throws ConstraintError for empty fields or a non-RFC-3339 timestamp,
  /// StoreCorrupt when the existing chain is broken.
  std::uint64_t append(const AuditEvent& event);

  /// Matching entries in insertion order. Verifies the chain first and
  /// throws StoreCorrupt when it is broken.
  std::vector<AuditEntry> query(const AuditFilter& filter = {}) const;

  /// Number of entries after verifying the chain.
  std::size_t verify() const;

 private:
  /// Verified entries; `chain_head` receives the hash the next entry must
  /// reference.
  std::vector<AuditEntry> read_all(std::string* chain_head = nullptr) const;

  std::filesystem::path file_;
};

std::string audit_line(const AuditEntry& entry);

}  // namespace cellvault
