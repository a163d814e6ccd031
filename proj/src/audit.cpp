#include "cellvault/audit.hpp"

#include <nlohmann/json.hpp>

#include "cellvault/canonical.hpp"
#include "cellvault/clock.hpp"
#include "cellvault/error.hpp"
#include "cellvault/sha256.hpp"
#include "fs_util.hpp"

namespace cellvault {
namespace {

[[noreturn]] void invalid_manifest(const ChangeManifest& m, const std::string& why) {
  throw Error(ErrorCode::ManifestInvalid, "manifest '" + m.manifest_id + "': " + why);
}

bool inside_any(const std::vector<Region>& regions, const CellAddress& address) {
  if (address.is_whole_sheet()) return false;
  for (const auto& r : regions) {
    if (r.contains(address)) return true;
  }
  return false;
}

AuditEntry parse_entry(const std::string& line) {
  try {
    auto j = nlohmann::json::parse(line);
    AuditEntry e;
    e.entry_id = j.at("entry_id").get<std::uint64_t>();
    e.event.actor = j.at("actor").get<std::string>();
    e.event.action = j.at("action").get<std::string>();
    e.event.target = j.at("target").get<std::string>();
    e.event.timestamp = j.at("timestamp").get<std::string>();
    e.prev_hash = j.at("prev").get<std::string>();
    if (audit_line(e) != line) throw Error(ErrorCode::StoreCorrupt, "audit line is not canonical");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::StoreCorrupt, std::string("unreadable audit line: ") + ex.what());
  }
}

}  // namespace

void ChangeManifest::validate() const {
  if (manifest_id.empty()) invalid_manifest(*this, "manifest_id must not be empty");
  if (approver.empty()) invalid_manifest(*this, "approver must not be empty");
  if (applies_to.empty()) invalid_manifest(*this, "applies_to must not be empty");
  if (!is_rfc3339_utc(created)) invalid_manifest(*this, "created must be an RFC-3339 UTC timestamp");
  for (const auto& r : allowed) {
    if (!r.well_formed()) invalid_manifest(*this, "allowed region " + format_region(r) + " is not well-formed");
  }
  for (const auto& a : required) {
    if (a.row == 0 || a.col == 0) invalid_manifest(*this, "required entries must be cells");
    if (!inside_any(allowed, a)) {
      invalid_manifest(*this, "required cell " + format_address(a) + " is outside every allowed region");
    }
  }
}

ComplianceReport verify_manifest(const ChangeSet& changes, const ChangeManifest& manifest,
                                 const std::string& from_commit, const std::string& to_commit) {
  manifest.validate();
  ComplianceReport report;
  report.manifest_id = manifest.manifest_id;
  report.from_commit = from_commit;
  report.to_commit = to_commit;
  report.total_changes = changes.size();
  for (const auto& rec : changes) {
    if (inside_any(manifest.allowed, rec.address)) ++report.allowed_changes;
    else report.violations.push_back(rec);
  }
  for (const auto& req : manifest.required) {
    bool touched = false;
    for (const auto& rec : changes) {
      if (rec.address == req) {
        touched = true;
        break;
      }
    }
    if (!touched) report.unfulfilled.push_back(req);
  }
  report.compliant = report.violations.empty() && report.unfulfilled.empty();
  return report;
}

std::string audit_line(const AuditEntry& entry) {
  std::string out = "{\"entry_id\":" + std::to_string(entry.entry_id) + ",\"actor\":";
  append_json_string(out, entry.event.actor);
  out += ",\"action\":";
  append_json_string(out, entry.event.action);
  out += ",\"target\":";
  append_json_string(out, entry.event.target);
  out += ",\"timestamp\":";
  append_json_string(out, entry.event.timestamp);
  out += ",\"prev\":";
  append_json_string(out, entry.prev_hash);
  out += '}';
  return out;
}

std::vector<AuditEntry> AuditLog::read_all(std::string* chain_head) const {
  std::vector<AuditEntry> entries;
  std::string prev = kGenesis;
  for (const auto& line : detail::read_lines(file_)) {
    AuditEntry e = parse_entry(line);
    if (e.prev_hash != prev || e.entry_id != entries.size() + 1) {
      throw Error(ErrorCode::StoreCorrupt,
                  "audit chain broken at entry " + std::to_string(entries.size() + 1) + " of '" + file_.string() + "'");
    }
    prev = sha256_hex(line);
    entries.push_back(std::move(e));
  }
  if (chain_head) *chain_head = prev;
  return entries;
}

std::uint64_t AuditLog::append(const AuditEvent& event) {
  if (event.actor.empty() || event.action.empty() || event.target.empty()) {
    throw Error(ErrorCode::ConstraintError, "audit events need actor, action and target");
  }
  if (!is_rfc3339_utc(event.timestamp)) {
    throw Error(ErrorCode::ConstraintError, "audit timestamp must be RFC-3339 UTC");
  }
  std::string head;
  std::size_t count = read_all(&head).size();
  AuditEntry entry;
  entry.entry_id = count + 1;
  entry.event = event;
  entry.prev_hash = head;
  detail::append_line(file_, audit_line(entry));
  return entry.entry_id;
}

std::vector<AuditEntry> AuditLog::query(const AuditFilter& filter) const {
  std::vector<AuditEntry> out;
  for (auto& e : read_all()) {
    if (filter.actor && e.event.actor != *filter.actor) continue;
    if (filter.action && e.event.action != *filter.action) continue;
    if (filter.target && e.event.target != *filter.target) continue;
    out.push_back(std::move(e));
  }
  return out;
}

std::size_t AuditLog::verify() const { return read_all().size(); }

}  // namespace cellvault
