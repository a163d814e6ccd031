#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cellvault/address.hpp"
#include "cellvault/canonical.hpp"
#include "cellvault/clock.hpp"
#include "cellvault/snapshot.hpp"

namespace cellvault {

namespace detail {
class FileLock;
}

/// One entry of a workbook's lineage. `commit_id` is the SHA-256 of the
/// canonical commit line with the id field left out.
struct CommitRecord {
  std::string commit_id;
  std::string workbook_id;
  std::optional<std::string> parent;
  SnapshotHash snapshot{std::string(64, '0')};
  std::string author;
  std::string timestamp;
  std::string message;
  std::string source;

  friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

/// `{"commit_id":...,"workbook_id":...,"parent":...,"snapshot":...,"author":...,
///   "timestamp":...,"message":...,"source":...}`, minified, fixed key order.
std::string commit_line(const CommitRecord& record);
/// SHA-256 of the commit line without the commit_id member.
std::string compute_commit_id(const CommitRecord& record);

struct HistoryPoint {
  std::string commit_id;
  std::string timestamp;
  CellValue value;
  std::optional<std::string> formula;
  bool changed = false;

  friend bool operator==(const HistoryPoint&, const HistoryPoint&) = default;
};

/// One point per commit, oldest first; absent cells read as Empty.
struct HistorySeries {
  CellAddress address;
  std::vector<HistoryPoint> points;

  friend bool operator==(const HistorySeries&, const HistorySeries&) = default;
};

/// Dense values of a rectangle at one commit (Empty where no cell exists).
struct ExportTable {
  std::string commit_id;
  Region region;
  std::vector<std::vector<CellValue>> rows;

  friend bool operator==(const ExportTable&, const ExportTable&) = default;
};

/// Held for the duration of a workbook write transaction.
class WorkbookLock {
 public:
  WorkbookLock(std::string workbook_id, std::unique_ptr<detail::FileLock> lock);
  WorkbookLock(WorkbookLock&&) noexcept;
  ~WorkbookLock();

  const std::string& workbook_id() const { return workbook_id_; }

 private:
  std::string workbook_id_;
  std::unique_ptr<detail::FileLock> lock_;
};

/// Memoizes parsed sheet blobs by content hash, so loading many versions of
/// a workbook parses each distinct sheet once and unchanged sheets are shared
/// between the loaded snapshots.
class SheetCache {
 public:
  std::shared_ptr<const Sheet> find(const std::string& blob) const;
  void insert(const std::string& blob, std::shared_ptr<const Sheet> sheet);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Sheet>> sheets_;
};

/// Append-only, content-addressed store of workbook lineages.
///
/// Layout under the root:
///   objects/<2 hex>/<62 hex>         sheet blobs and snapshot manifests
///   workbooks/<id>/commits.jsonl      one commit line per version
///   workbooks/<id>/lock               advisory writer lock
///
/// A sheet blob is the canonical `{"name":..,"cells":[..]}` fragment stored
/// under its own SHA-256. A snapshot manifest lists the blobs of a snapshot
/// in name order and is stored under the snapshot hash; concatenating the
/// listed blobs inside `{"sheets":[..]}` reproduces the canonical bytes, so
/// both object kinds are verified against their key on every read.
class VersionStore {
 public:
  static constexpr std::chrono::milliseconds kDefaultLockTimeout{5000};

  /// Creates the directory layout (idempotent) and opens the store.
  static VersionStore init(const std::filesystem::path& root);

  /// Opens an existing store. Throws NotFound when `root` is not initialized.
  explicit VersionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path workbook_dir(const std::string& workbook_id) const;

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_lock_timeout(std::chrono::milliseconds timeout) { lock_timeout_ = timeout; }
  std::string now() const { return clock_(); }

  /// Takes the workbook's writer lock. Throws ConcurrentWriter on timeout and
  /// ConstraintError for an invalid workbook id.
  WorkbookLock lock(const std::string& workbook_id) const;

  CommitRecord commit(const std::string& workbook_id, const WorkbookSnapshot& snapshot, const std::string& author,
                      const std::string& message, const std::string& source);
  /// Variant for callers that already hold the lock as part of a larger
  /// transaction.
  CommitRecord commit(const WorkbookLock& lock, const WorkbookSnapshot& snapshot, const std::string& author,
                      const std::string& message, const std::string& source);

  /// Throws NotFound or StoreCorrupt; the result always re-hashes to `hash`.
  WorkbookSnapshot get_snapshot(const SnapshotHash& hash) const;
  WorkbookSnapshot get_snapshot(const SnapshotHash& hash, SheetCache& cache) const;
  /// Verified canonical bytes of a stored snapshot.
  std::string canonical_bytes(const SnapshotHash& hash) const;

  bool has_workbook(const std::string& workbook_id) const;
  std::vector<std::string> workbooks() const;

  /// Lineage order. Throws NotFound for an unknown workbook.
  std::vector<CommitRecord> log(const std::string& workbook_id) const;
  /// Accepts a commit id or "latest". Throws NotFound.
  CommitRecord find_commit(const std::string& workbook_id, const std::string& commit_ref) const;

  /// Series over the last `window` commits (fewer when the lineage is
  /// shorter). Throws NotFound for an unknown workbook, ConstraintError for
  /// window 0.
  HistorySeries cell_history(const std::string& workbook_id, const CellAddress& address, std::size_t window) const;

  /// Canonical JSON bytes of the snapshot at `commit_id`. Read-only.
  std::string restore(const std::string& workbook_id, const std::string& commit_id) const;

  /// Throws NotFound, MalformedRegion.
  ExportTable export_region(const std::string& workbook_id, const std::string& commit_ref,
                            const Region& region) const;

  /// Number and total size of object files; used to observe deduplication.
  std::size_t object_count() const;
  std::size_t object_bytes() const;

 private:
  std::filesystem::path object_path(const std::string& hex) const;
  std::filesystem::path commits_path(const std::string& workbook_id) const;
  /// Stores `bytes` under `hex` unless present; an existing object must hold
  /// the same bytes.
  void put_object(const std::string& hex, const std::string& bytes) const;
  std::string read_object(const std::string& hex) const;
  struct ManifestEntry {
    std::string name;
    std::string blob;
  };
  std::vector<ManifestEntry> read_manifest(const SnapshotHash& hash) const;
  std::shared_ptr<const Sheet> load_sheet(const std::string& blob, SheetCache& cache) const;

  std::filesystem::path root_;
  Clock clock_ = utc_now_rfc3339;
  std::chrono::milliseconds lock_timeout_ = kDefaultLockTimeout;
};

/// Workbook ids become directory names: 1-128 characters from
/// [A-Za-z0-9._-], not starting with '.'.
bool is_valid_workbook_id(const std::string& id);

}  // namespace cellvault
