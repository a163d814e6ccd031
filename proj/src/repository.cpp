#include "cellvault/repository.hpp"

#include <algorithm>
#include <map>

#include "cellvault/api_json.hpp"
#include "cellvault/error.hpp"
#include "fs_util.hpp"

namespace cellvault {
namespace {

std::size_t lineage_index(const std::vector<CommitRecord>& records, const std::string& ref,
                          const std::string& workbook_id) {
  if (ref == "latest") return records.size() - 1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].commit_id == ref) return i;
  }
  throw Error(ErrorCode::NotFound, "commit '" + ref + "' is not in the lineage of '" + workbook_id + "'");
}

std::vector<ChangeManifest> load_manifests(const std::filesystem::path& dir) {
  std::vector<ChangeManifest> out;
  for (const auto& line : detail::read_lines(dir / "manifests.jsonl")) {
    try {
      out.push_back(manifest_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::StoreCorrupt, std::string("unreadable manifest line: ") + e.what());
    }
  }
  return out;
}

}  // namespace

void Repository::audit_append(const std::string& workbook_id, const std::string& actor, const std::string& action,
                              const std::string& target) {
  AuditLog(store_.workbook_dir(workbook_id) / "audit.jsonl")
      .append({actor.empty() ? "anonymous" : actor, action, target, store_.now()});
}

CommitOutcome Repository::commit(const std::string& workbook_id, const WorkbookSnapshot& snapshot,
                                 const std::string& author, const std::string& message, const std::string& source,
                                 const WatchConfig& watch) {
  if (author.empty()) throw Error(ErrorCode::ConstraintError, "commit author must not be empty");
  watch.validate();
  auto guard = store_.lock(workbook_id);
  const auto dir = store_.workbook_dir(workbook_id);
  auto rules = load_rules(dir);

  std::optional<WorkbookSnapshot> parent;
  SheetCache cache;
  if (store_.has_workbook(workbook_id)) {
    parent = store_.get_snapshot(store_.find_commit(workbook_id, "latest").snapshot, cache);
  }

  CommitOutcome out;
  out.record = store_.commit(guard, snapshot, author, message, source);
  out.changes = classify(cellvault::diff(parent ? *parent : WorkbookSnapshot{}, snapshot), watch);
  out.summary = summarize(out.changes);

  // History strictly before the new commit: drop the final (new) point.
  HistoryAccess history = [&](const CellAddress& address, std::size_t count) {
    std::vector<CellValue> values;
    if (count == 0) return values;
    auto series = store_.cell_history(workbook_id, address, count + 1);
    for (std::size_t i = 0; i + 1 < series.points.size(); ++i) values.push_back(series.points[i].value);
    return values;
  };
  out.firings = evaluate(rules, parent ? &*parent : nullptr, snapshot, out.record.commit_id, history);
  append_firings(dir, out.firings);
  audit_append(workbook_id, author, "commit", workbook_id + "@" + out.record.commit_id);
  return out;
}

std::string Repository::add_rule(const std::string& workbook_id, const AlertRule& rule, const std::string& actor) {
  rule.validate();
  auto guard = store_.lock(workbook_id);
  const auto dir = store_.workbook_dir(workbook_id);
  for (const auto& existing : load_rules(dir)) {
    if (existing.rule_id == rule.rule_id) {
      throw Error(ErrorCode::DuplicateRuleId, "rule '" + rule.rule_id + "' already exists for '" + workbook_id + "'");
    }
  }
  append_rule(dir, rule);
  audit_append(workbook_id, actor, "rule.add", workbook_id + "/" + rule.rule_id);
  return rule.rule_id;
}

std::vector<AlertRule> Repository::rules(const std::string& workbook_id) const {
  return load_rules(store_.workbook_dir(workbook_id));
}

std::vector<AlertFiring> Repository::alerts(const std::string& workbook_id) const {
  return load_firings(store_.workbook_dir(workbook_id));
}

ChangeSet Repository::diff(const std::string& workbook_id, const std::string& from, const std::string& to,
                           const WatchConfig& watch) const {
  watch.validate();
  auto a = store_.find_commit(workbook_id, from);
  auto b = store_.find_commit(workbook_id, to);
  SheetCache cache;
  return classify(cellvault::diff(store_.get_snapshot(a.snapshot, cache), store_.get_snapshot(b.snapshot, cache)),
                  watch);
}

std::string Repository::restore(const std::string& workbook_id, const std::string& commit_id,
                                const std::string& actor) {
  std::string bytes = store_.restore(workbook_id, commit_id);
  auto guard = store_.lock(workbook_id);
  audit_append(workbook_id, actor, "restore", workbook_id + "@" + commit_id);
  return bytes;
}

void Repository::add_manifest(const std::string& workbook_id, const ChangeManifest& manifest,
                              const std::string& actor) {
  manifest.validate();
  if (manifest.applies_to != workbook_id) {
    throw Error(ErrorCode::ManifestInvalid,
                "manifest '" + manifest.manifest_id + "' applies to '" + manifest.applies_to + "'");
  }
  auto guard = store_.lock(workbook_id);
  const auto dir = store_.workbook_dir(workbook_id);
  for (const auto& m : load_manifests(dir)) {
    if (m.manifest_id == manifest.manifest_id) {
      throw Error(ErrorCode::ManifestInvalid, "manifest '" + manifest.manifest_id + "' already exists");
    }
  }
  detail::append_line(dir / "manifests.jsonl", to_json(manifest).dump());
  audit_append(workbook_id, actor, "manifest.add", workbook_id + "/" + manifest.manifest_id);
}

ChangeManifest Repository::manifest(const std::string& workbook_id, const std::string& manifest_id) const {
  for (auto& m : load_manifests(store_.workbook_dir(workbook_id))) {
    if (m.manifest_id == manifest_id) return m;
  }
  throw Error(ErrorCode::NotFound, "no manifest '" + manifest_id + "' for '" + workbook_id + "'");
}

ComplianceReport Repository::verify(const std::string& workbook_id, const ChangeManifest& manifest,
                                    const std::optional<std::string>& from, const std::optional<std::string>& to,
                                    const std::string& actor) {
  manifest.validate();
  auto records = store_.log(workbook_id);
  std::size_t to_index = lineage_index(records, to.value_or("latest"), workbook_id);
  std::optional<std::size_t> from_index;
  if (from) from_index = lineage_index(records, *from, workbook_id);
  else if (to_index > 0) from_index = to_index - 1;
  if (from_index && *from_index > to_index) {
    throw Error(ErrorCode::ConstraintError, "verification range must run forward in the lineage");
  }

  SheetCache cache;
  auto load = [&](std::size_t i) { return store_.get_snapshot(records[i].snapshot, cache); };
  ChangeSet changes;
  if (!from_index) {
    changes = cellvault::diff(WorkbookSnapshot{}, load(to_index));
  } else if (*from_index + 1 >= to_index) {
    changes = cellvault::diff(load(*from_index), load(to_index));
  } else {
    std::map<CellAddress, ChangeRecord> merged;
    for (std::size_t i = *from_index + 1; i <= to_index; ++i) {
      for (auto& rec : cellvault::diff(load(i - 1), load(i))) merged.insert_or_assign(rec.address, std::move(rec));
    }
    for (auto& [_, rec] : merged) changes.push_back(std::move(rec));
  }

  auto report = verify_manifest(changes, manifest, from_index ? records[*from_index].commit_id : std::string{},
                                records[to_index].commit_id);
  auto guard = store_.lock(workbook_id);
  audit_append(workbook_id, actor, "verify", workbook_id + "/" + manifest.manifest_id);
  return report;
}

std::vector<AuditEntry> Repository::audit(const std::string& workbook_id, const AuditFilter& filter) const {
  return AuditLog(store_.workbook_dir(workbook_id) / "audit.jsonl").query(filter);
}

}  // namespace cellvault
