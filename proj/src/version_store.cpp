#include "cellvault/version_store.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cellvault/error.hpp"
#include "cellvault/ingest.hpp"
#include "cellvault/sha256.hpp"
#include "fs_util.hpp"

namespace cellvault {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxExportCells = 10'000'000;

[[noreturn]] void corrupt(const std::string& detail) { throw Error(ErrorCode::StoreCorrupt, detail); }

void append_optional_string(std::string& out, const std::optional<std::string>& s) {
  if (s) append_json_string(out, *s);
  else out += "null";
}

std::string record_body(const CommitRecord& r) {
  std::string out = "\"workbook_id\":";
  append_json_string(out, r.workbook_id);
  out += ",\"parent\":";
  append_optional_string(out, r.parent);
  out += ",\"snapshot\":";
  append_json_string(out, r.snapshot.hex());
  out += ",\"author\":";
  append_json_string(out, r.author);
  out += ",\"timestamp\":";
  append_json_string(out, r.timestamp);
  out += ",\"message\":";
  append_json_string(out, r.message);
  out += ",\"source\":";
  append_json_string(out, r.source);
  return out;
}

std::string get_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) corrupt(std::string("commit line lacks string field ") + key);
  return it->get<std::string>();
}

CommitRecord parse_commit_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    corrupt(std::string("unparseable commit line: ") + e.what());
  }
  if (!j.is_object()) corrupt("commit line is not an object");
  CommitRecord r;
  r.commit_id = get_string(j, "commit_id");
  r.workbook_id = get_string(j, "workbook_id");
  auto parent = j.find("parent");
  if (parent == j.end() || !(parent->is_null() || parent->is_string())) corrupt("commit line has a bad parent");
  if (parent->is_string()) r.parent = parent->get<std::string>();
  try {
    r.snapshot = SnapshotHash(get_string(j, "snapshot"));
  } catch (const Error&) {
    corrupt("commit line has a bad snapshot hash");
  }
  r.author = get_string(j, "author");
  r.timestamp = get_string(j, "timestamp");
  r.message = get_string(j, "message");
  r.source = get_string(j, "source");
  if (commit_line(r) != line) corrupt("commit line is not in canonical form");
  if (compute_commit_id(r) != r.commit_id) corrupt("commit id mismatch for " + r.commit_id);
  return r;
}

}  // namespace

std::string commit_line(const CommitRecord& record) {
  std::string out = "{\"commit_id\":";
  append_json_string(out, record.commit_id);
  out += ',';
  out += record_body(record);
  out += '}';
  return out;
}

std::string compute_commit_id(const CommitRecord& record) { return sha256_hex("{" + record_body(record) + "}"); }

bool is_valid_workbook_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char ch : id) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
              ch == '_' || ch == '-';
    if (!ok) return false;
  }
  return true;
}

WorkbookLock::WorkbookLock(std::string workbook_id, std::unique_ptr<detail::FileLock> lock)
    : workbook_id_(std::move(workbook_id)), lock_(std::move(lock)) {}
WorkbookLock::WorkbookLock(WorkbookLock&&) noexcept = default;
WorkbookLock::~WorkbookLock() = default;

std::shared_ptr<const Sheet> SheetCache::find(const std::string& blob) const {
  std::lock_guard lock(mu_);
  auto it = sheets_.find(blob);
  return it == sheets_.end() ? nullptr : it->second;
}

void SheetCache::insert(const std::string& blob, std::shared_ptr<const Sheet> sheet) {
  std::lock_guard lock(mu_);
  sheets_.emplace(blob, std::move(sheet));
}

VersionStore VersionStore::init(const fs::path& root) {
  fs::create_directories(root / "objects");
  fs::create_directories(root / "workbooks");
  return VersionStore(root);
}

VersionStore::VersionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  if (!fs::is_directory(root_ / "objects", ec) || !fs::is_directory(root_ / "workbooks", ec)) {
    throw Error(ErrorCode::NotFound, "no initialized store at '" + root_.string() + "'");
  }
}

fs::path VersionStore::workbook_dir(const std::string& workbook_id) const {
  if (!is_valid_workbook_id(workbook_id)) {
    throw Error(ErrorCode::ConstraintError, "invalid workbook id '" + workbook_id + "'");
  }
  return root_ / "workbooks" / workbook_id;
}

fs::path VersionStore::commits_path(const std::string& workbook_id) const {
  return workbook_dir(workbook_id) / "commits.jsonl";
}

fs::path VersionStore::object_path(const std::string& hex) const {
  return root_ / "objects" / hex.substr(0, 2) / hex.substr(2);
}

WorkbookLock VersionStore::lock(const std::string& workbook_id) const {
  auto dir = workbook_dir(workbook_id);
  fs::create_directories(dir);
  return WorkbookLock(workbook_id, std::make_unique<detail::FileLock>(dir / "lock", lock_timeout_));
}

void VersionStore::put_object(const std::string& hex, const std::string& bytes) const {
  auto path = object_path(hex);
  std::error_code ec;
  if (fs::exists(path, ec)) {
    if (detail::read_file(path) != bytes) corrupt("existing object " + hex + " does not match its content hash");
    return;
  }
  fs::create_directories(path.parent_path());
  detail::write_file_atomic(path, bytes);
}

std::string VersionStore::read_object(const std::string& hex) const {
  if (!is_sha256_hex(hex)) corrupt("bad object reference '" + hex + "'");
  return detail::read_file(object_path(hex));
}

CommitRecord VersionStore::commit(const std::string& workbook_id, const WorkbookSnapshot& snapshot,
                                  const std::string& author, const std::string& message, const std::string& source) {
  auto guard = lock(workbook_id);
  return commit(guard, snapshot, author, message, source);
}

CommitRecord VersionStore::commit(const WorkbookLock& guard, const WorkbookSnapshot& snapshot,
                                  const std::string& author, const std::string& message, const std::string& source) {
  if (author.empty()) throw Error(ErrorCode::ConstraintError, "commit author must not be empty");
  const std::string& workbook_id = guard.workbook_id();
  std::string manifest = "{\"sheets\":[";
  std::string canonical = "{\"sheets\":[";
  bool first = true;
  for (const auto& [name, sheet] : snapshot.sheets()) {
    std::string blob = canonical_sheet(*sheet);
    std::string blob_hash = sha256_hex(blob);
    put_object(blob_hash, blob);
    if (!first) {
      manifest += ',';
      canonical += ',';
    }
    first = false;
    manifest += "{\"name\":";
    append_json_string(manifest, name);
    manifest += ",\"blob\":\"" + blob_hash + "\"}";
    canonical += blob;
  }
  manifest += "]}";
  canonical += "]}";
  SnapshotHash hash(sha256_hex(canonical));
  put_object(hash.hex(), manifest);

  auto lines = detail::read_lines(commits_path(workbook_id));
  CommitRecord record;
  record.workbook_id = workbook_id;
  if (!lines.empty()) record.parent = parse_commit_line(lines.back()).commit_id;
  record.snapshot = hash;
  record.author = author;
  record.timestamp = clock_();
  record.message = message;
  record.source = source;
  record.commit_id = compute_commit_id(record);
  detail::append_line(commits_path(workbook_id), commit_line(record));
  return record;
}

std::vector<VersionStore::ManifestEntry> VersionStore::read_manifest(const SnapshotHash& hash) const {
  std::string bytes = read_object(hash.hex());
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception&) {
    corrupt("snapshot manifest " + hash.hex() + " is unreadable");
  }
  std::vector<ManifestEntry> entries;
  if (!j.is_object() || !j.contains("sheets") || !j["sheets"].is_array()) {
    corrupt("snapshot manifest " + hash.hex() + " is malformed");
  }
  for (const auto& e : j["sheets"]) {
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("blob") ||
        !e["blob"].is_string()) {
      corrupt("snapshot manifest " + hash.hex() + " has a malformed entry");
    }
    entries.push_back({e["name"].get<std::string>(), e["blob"].get<std::string>()});
  }
  return entries;
}

std::shared_ptr<const Sheet> VersionStore::load_sheet(const std::string& blob, SheetCache& cache) const {
  if (auto hit = cache.find(blob)) return hit;
  std::string bytes = read_object(blob);
  if (sha256_hex(bytes) != blob) corrupt("sheet blob " + blob + " fails its content hash");
  std::shared_ptr<const Sheet> sheet;
  try {
    sheet = std::make_shared<const Sheet>(ingest_sheet_json(bytes));
  } catch (const Error& e) {
    corrupt("sheet blob " + blob + " is unreadable: " + e.what());
  }
  cache.insert(blob, sheet);
  return sheet;
}

std::string VersionStore::canonical_bytes(const SnapshotHash& hash) const {
  auto entries = read_manifest(hash);
  std::string out = "{\"sheets\":[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ',';
    out += read_object(entries[i].blob);
  }
  out += "]}";
  if (sha256_hex(out) != hash.hex()) corrupt("snapshot " + hash.hex() + " fails its content hash");
  return out;
}

WorkbookSnapshot VersionStore::get_snapshot(const SnapshotHash& hash) const {
  SheetCache cache;
  return get_snapshot(hash, cache);
}

WorkbookSnapshot VersionStore::get_snapshot(const SnapshotHash& hash, SheetCache& cache) const {
  auto entries = read_manifest(hash);
  std::vector<std::shared_ptr<const Sheet>> sheets;
  std::string canonical = "{\"sheets\":[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto sheet = load_sheet(entries[i].blob, cache);
    if (sheet->name() != entries[i].name) corrupt("snapshot manifest " + hash.hex() + " names the wrong sheet");
    if (i) canonical += ',';
    // Blob bytes are the sheet's canonical form, already verified by hash.
    canonical += canonical_sheet(*sheet);
    sheets.push_back(std::move(sheet));
  }
  canonical += "]}";
  if (sha256_hex(canonical) != hash.hex()) corrupt("snapshot " + hash.hex() + " fails its content hash");
  try {
    return WorkbookSnapshot(std::move(sheets));
  } catch (const Error& e) {
    corrupt("snapshot " + hash.hex() + ": " + e.what());
  }
}

bool VersionStore::has_workbook(const std::string& workbook_id) const {
  if (!is_valid_workbook_id(workbook_id)) return false;
  std::error_code ec;
  return fs::exists(commits_path(workbook_id), ec);
}

std::vector<std::string> VersionStore::workbooks() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_ / "workbooks")) {
    auto id = entry.path().filename().string();
    if (has_workbook(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<CommitRecord> VersionStore::log(const std::string& workbook_id) const {
  if (!has_workbook(workbook_id)) throw Error(ErrorCode::NotFound, "unknown workbook '" + workbook_id + "'");
  std::vector<CommitRecord> records;
  for (const auto& line : detail::read_lines(commits_path(workbook_id))) {
    CommitRecord r = parse_commit_line(line);
    std::optional<std::string> expected_parent;
    if (!records.empty()) expected_parent = records.back().commit_id;
    if (r.parent != expected_parent || r.workbook_id != workbook_id) {
      corrupt("broken lineage at commit " + r.commit_id);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::NotFound, "workbook '" + workbook_id + "' has no commits");
  return records;
}

CommitRecord VersionStore::find_commit(const std::string& workbook_id, const std::string& commit_ref) const {
  auto records = log(workbook_id);
  if (commit_ref == "latest") return records.back();
  for (auto& r : records) {
    if (r.commit_id == commit_ref) return r;
  }
  throw Error(ErrorCode::NotFound, "commit '" + commit_ref + "' is not in the lineage of '" + workbook_id + "'");
}

HistorySeries VersionStore::cell_history(const std::string& workbook_id, const CellAddress& address,
                                         std::size_t window) const {
  if (window == 0) throw Error(ErrorCode::ConstraintError, "history window must be >= 1");
  auto records = log(workbook_id);
  std::size_t first = records.size() > window ? records.size() - window : 0;
  HistorySeries series;
  series.address = address;
  SheetCache cache;
  const HistoryPoint* prev = nullptr;
  for (std::size_t i = first; i < records.size(); ++i) {
    HistoryPoint point;
    point.commit_id = records[i].commit_id;
    point.timestamp = records[i].timestamp;
    bool exists = false;
    for (const auto& entry : read_manifest(records[i].snapshot)) {
      if (entry.name != address.sheet) continue;
      if (const Cell* cell = load_sheet(entry.blob, cache)->find(address.pos())) {
        point.value = cell->value();
        point.formula = cell->formula();
        exists = true;
      }
      break;
    }
    point.changed = prev ? (point.value != prev->value || point.formula != prev->formula) : exists;
    series.points.push_back(std::move(point));
    prev = &series.points.back();
  }
  return series;
}

std::string VersionStore::restore(const std::string& workbook_id, const std::string& commit_id) const {
  if (commit_id == "latest") throw Error(ErrorCode::NotFound, "restore needs an explicit commit id");
  return canonical_bytes(find_commit(workbook_id, commit_id).snapshot);
}

ExportTable VersionStore::export_region(const std::string& workbook_id, const std::string& commit_ref,
                                        const Region& region) const {
  if (!region.well_formed() || region.sheet == "*") {
    throw Error(ErrorCode::MalformedRegion, "export needs a well-formed single-sheet region");
  }
  std::size_t height = region.bottom_right.row - region.top_left.row + 1;
  std::size_t width = region.bottom_right.col - region.top_left.col + 1;
  if (height > kMaxExportCells / width) throw Error(ErrorCode::MalformedRegion, "export region is too large");
  CommitRecord record = find_commit(workbook_id, commit_ref);
  ExportTable table;
  table.commit_id = record.commit_id;
  table.region = region;
  table.rows.assign(height, std::vector<CellValue>(width));
  SheetCache cache;
  for (const auto& entry : read_manifest(record.snapshot)) {
    if (entry.name != region.sheet) continue;
    auto sheet = load_sheet(entry.blob, cache);
    auto it = sheet->cells().lower_bound({region.top_left.row, 0});
    for (; it != sheet->cells().end() && it->first.row <= region.bottom_right.row; ++it) {
      const GridPos& p = it->first;
      if (p.col < region.top_left.col || p.col > region.bottom_right.col) continue;
      table.rows[p.row - region.top_left.row][p.col - region.top_left.col] = it->second.value();
    }
  }
  return table;
}

std::size_t VersionStore::object_count() const {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "objects")) {
    if (e.is_regular_file()) ++n;
  }
  return n;
}

std::size_t VersionStore::object_bytes() const {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "objects")) {
    if (e.is_regular_file()) n += e.file_size();
  }
  return n;
}

}  // namespace cellvault
