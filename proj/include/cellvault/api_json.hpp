#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellvault/alerts.hpp"
#include "cellvault/analytics.hpp"
#include "cellvault/audit.hpp"
#include "cellvault/diff.hpp"
#include "cellvault/discover.hpp"
#include "cellvault/repository.hpp"
#include "cellvault/version_store.hpp"

// JSON shapes shared by the CLI's machine output and the HTTP API, so both
// front ends emit byte-identical payloads for the same library result.

namespace cellvault {

using Json = nlohmann::json;

/// Empty -> null, Number -> number, Text -> string, Boolean -> bool,
/// Error -> {"error":"#N/A"}.
Json to_json(const CellValue& value);
CellValue value_from_json(const Json& j);

Json to_json(const Cell& cell);
Json to_json(const CellAddress& address);
Json to_json(const ChangeRecord& record);
Json to_json(const ChangeSet& changes);
Json to_json(const DiffSummary& summary);
Json to_json(const CommitRecord& record);
Json to_json(const std::vector<CommitRecord>& records);
Json to_json(const HistorySeries& series);
Json to_json(const ExportTable& table);
Json to_json(const AlertRule& rule);
Json to_json(const AlertFiring& firing);
Json to_json(const RetirementReport& report);
Json to_json(const ChangeManifest& manifest);
Json to_json(const ComplianceReport& report);
Json to_json(const AuditEntry& entry);
Json to_json(const InventoryReport& report);
/// `{"commit_id","snapshot_hash","diff_summary","firings","warnings"}`.
Json commit_payload(const CommitOutcome& outcome, const std::vector<std::string>& ingest_warnings);

template <typename T>
Json to_json_array(const std::vector<T>& items) {
  Json out = Json::array();
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

/// Throws RuleInvalid for malformed or invalid rules.
AlertRule rule_from_json(const Json& j);
AlertFiring firing_from_json(const Json& j);
/// Throws ManifestInvalid.
ChangeManifest manifest_from_json(const Json& j);
/// Parses `{"input_regions":["S!A1:B9", ...]}`. Throws MalformedRegion.
WatchConfig watch_config_from_json(const Json& j);

/// RFC-4180 CSV of the table values, CRLF-terminated rows.
std::string export_csv(const ExportTable& table);

/// Compact rendering used for every payload; invalid UTF-8 is replaced
/// rather than rejected.
std::string serialize(const Json& j);

/// One compact JSON document per line, each LF-terminated.
std::string to_jsonl(const Json& array);

}  // namespace cellvault
