#include "cellvault/api_json.hpp"

#include "cellvault/error.hpp"

namespace cellvault {
namespace {

Json optional_cell(const std::optional<Cell>& cell) { return cell ? to_json(*cell) : Json(nullptr); }

double rule_number(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw Error(ErrorCode::RuleInvalid, std::string("rule needs numeric \"") + key + "\"");
  }
  return it->get<double>();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

Json to_json(const CellValue& value) {
  switch (value.type()) {
    case ValueType::Empty: return nullptr;
    case ValueType::Number: return value.as_number();
    case ValueType::Text: return value.as_text();
    case ValueType::Boolean: return value.as_boolean();
    case ValueType::Error: return Json{{"error", std::string(to_string(value.as_error()))}};
  }
  return nullptr;
}

CellValue value_from_json(const Json& j) {
  if (j.is_null()) return CellValue::empty();
  if (j.is_number()) return CellValue::number(j.get<double>());
  if (j.is_string()) return CellValue::text(j.get<std::string>());
  if (j.is_boolean()) return CellValue::boolean(j.get<bool>());
  if (j.is_object() && j.contains("error") && j["error"].is_string()) {
    if (auto lit = parse_error_literal(j["error"].get<std::string>())) return CellValue::error(*lit);
  }
  throw Error(ErrorCode::FormatError, "not a cell value: " + j.dump());
}

Json to_json(const Cell& cell) {
  return {{"value", to_json(cell.value())},
          {"formula", cell.formula() ? Json(*cell.formula()) : Json(nullptr)}};
}

Json to_json(const CellAddress& address) {
  Json j{{"sheet", address.sheet}, {"row", address.row}, {"col", address.col}};
  j["a1"] = address.is_whole_sheet() ? Json(nullptr) : Json(format_address(address));
  return j;
}

Json to_json(const ChangeRecord& record) {
  return {{"address", to_json(record.address)},
          {"kind", std::string(to_string(record.kind))},
          {"old", optional_cell(record.old_cell)},
          {"new", optional_cell(record.new_cell)},
          {"policy", record.policy ? Json(std::string(to_string(*record.policy))) : Json(nullptr)}};
}

Json to_json(const ChangeSet& changes) { return to_json_array(changes); }

Json to_json(const DiffSummary& summary) {
  Json by_kind = Json::object();
  for (const auto& [kind, n] : summary.by_kind) by_kind[std::string(to_string(kind))] = n;
  Json by_sheet = Json::object();
  for (const auto& [sheet, n] : summary.by_sheet) by_sheet[sheet] = n;
  return {{"by_kind", by_kind},
          {"by_sheet", by_sheet},
          {"exceptional_count", summary.exceptional_count},
          {"total", summary.total}};
}

Json to_json(const CommitRecord& r) {
  return {{"commit_id", r.commit_id},
          {"workbook_id", r.workbook_id},
          {"parent", r.parent ? Json(*r.parent) : Json(nullptr)},
          {"snapshot", r.snapshot.hex()},
          {"author", r.author},
          {"timestamp", r.timestamp},
          {"message", r.message},
          {"source", r.source}};
}

Json to_json(const std::vector<CommitRecord>& records) { return to_json_array(records); }

Json to_json(const HistorySeries& series) {
  Json points = Json::array();
  for (const auto& p : series.points) {
    points.push_back({{"commit_id", p.commit_id},
                      {"timestamp", p.timestamp},
                      {"value", to_json(p.value)},
                      {"formula", p.formula ? Json(*p.formula) : Json(nullptr)},
                      {"changed", p.changed}});
  }
  return {{"address", to_json(series.address)}, {"points", points}};
}

Json to_json(const ExportTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(to_json(v));
    rows.push_back(std::move(r));
  }
  return {{"commit_id", table.commit_id}, {"region", format_region(table.region)}, {"rows", rows}};
}

Json to_json(const AlertRule& rule) {
  Json j{{"rule_id", rule.rule_id},
         {"target", rule.target.top_left == rule.target.bottom_right
                        ? format_address({rule.target.sheet, rule.target.top_left.row, rule.target.top_left.col})
                        : format_region(rule.target)},
         {"kind", std::string(to_string(rule.kind))},
         {"window", rule.window}};
  switch (rule.kind) {
    case RuleKind::ThresholdUp:
    case RuleKind::ThresholdDown: j["threshold"] = rule.threshold; break;
    case RuleKind::DeltaAbs: j["delta"] = rule.delta; break;
    case RuleKind::RangeBreach:
      j["lo"] = rule.lo;
      j["hi"] = rule.hi;
      break;
    case RuleKind::FormulaChanged: break;
  }
  return j;
}

AlertRule rule_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::RuleInvalid, "rule must be a JSON object");
  AlertRule rule;
  if (!j.contains("rule_id") || !j["rule_id"].is_string()) throw Error(ErrorCode::RuleInvalid, "rule needs rule_id");
  rule.rule_id = j["rule_id"].get<std::string>();
  if (!j.contains("target") || !j["target"].is_string()) throw Error(ErrorCode::RuleInvalid, "rule needs a target");
  try {
    rule.target = parse_region(j["target"].get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::RuleInvalid, e.what());
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw Error(ErrorCode::RuleInvalid, "rule needs a kind");
  auto kind = parse_rule_kind(j["kind"].get<std::string>());
  if (!kind) throw Error(ErrorCode::RuleInvalid, "unknown rule kind " + j["kind"].dump());
  rule.kind = *kind;
  switch (rule.kind) {
    case RuleKind::ThresholdUp:
    case RuleKind::ThresholdDown: rule.threshold = rule_number(j, "threshold"); break;
    case RuleKind::DeltaAbs: rule.delta = rule_number(j, "delta"); break;
    case RuleKind::RangeBreach:
      rule.lo = rule_number(j, "lo");
      rule.hi = rule_number(j, "hi");
      break;
    case RuleKind::FormulaChanged: break;
  }
  if (j.contains("window")) {
    if (!j["window"].is_number_integer() || j["window"].get<long long>() < 2) {
      throw Error(ErrorCode::RuleInvalid, "rule window must be an integer >= 2");
    }
    rule.window = j["window"].get<std::size_t>();
  }
  rule.validate();
  return rule;
}

Json to_json(const AlertFiring& f) {
  Json window = Json::array();
  for (const auto& v : f.window_values) window.push_back(to_json(v));
  return {{"rule_id", f.rule_id},
          {"address", to_json(f.address)},
          {"commit_id", f.commit_id},
          {"old_value", to_json(f.old_value)},
          {"new_value", to_json(f.new_value)},
          {"window_values", window},
          {"pattern", std::string(to_string(f.pattern))}};
}

AlertFiring firing_from_json(const Json& j) {
  AlertFiring f;
  f.rule_id = j.at("rule_id").get<std::string>();
  const Json& a = j.at("address");
  f.address = {a.at("sheet").get<std::string>(), a.at("row").get<std::uint32_t>(), a.at("col").get<std::uint32_t>()};
  f.commit_id = j.at("commit_id").get<std::string>();
  f.old_value = value_from_json(j.at("old_value"));
  f.new_value = value_from_json(j.at("new_value"));
  for (const auto& v : j.at("window_values")) f.window_values.push_back(value_from_json(v));
  auto label = parse_pattern_label(j.at("pattern").get<std::string>());
  if (!label) throw Error(ErrorCode::FormatError, "unknown pattern label");
  f.pattern = *label;
  return f;
}

Json to_json(const RetirementReport& r) {
  return {{"workbook_id", r.workbook_id},
          {"window", r.window},
          {"commits_considered", r.commits_considered},
          {"formula_change_commits", r.formula_change_commits},
          {"volatility", r.volatility},
          {"verdict", std::string(to_string(r.verdict))}};
}

Json to_json(const ChangeManifest& m) {
  Json required = Json::array();
  for (const auto& a : m.required) required.push_back(format_address(a));
  Json allowed = Json::array();
  for (const auto& r : m.allowed) allowed.push_back(format_region(r));
  return {{"manifest_id", m.manifest_id}, {"approver", m.approver}, {"created", m.created},
          {"required", required},         {"allowed", allowed},     {"applies_to", m.applies_to}};
}

ChangeManifest manifest_from_json(const Json& j) {
  auto text = [&](const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::ManifestInvalid, std::string("manifest needs string \"") + key + "\"");
    }
    return j[key].get<std::string>();
  };
  auto list = [&](const char* key) -> const Json& {
    if (!j.contains(key) || !j[key].is_array()) {
      throw Error(ErrorCode::ManifestInvalid, std::string("manifest needs array \"") + key + "\"");
    }
    return j[key];
  };
  ChangeManifest m;
  m.manifest_id = text("manifest_id");
  m.approver = text("approver");
  m.created = text("created");
  m.applies_to = text("applies_to");
  try {
    for (const auto& a : list("required")) m.required.push_back(parse_address(a.get<std::string>()));
    for (const auto& r : list("allowed")) m.allowed.push_back(parse_region(r.get<std::string>()));
  } catch (const Error& e) {
    throw Error(ErrorCode::ManifestInvalid, e.what());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ManifestInvalid, e.what());
  }
  m.validate();
  return m;
}

Json to_json(const ComplianceReport& r) {
  Json unfulfilled = Json::array();
  for (const auto& a : r.unfulfilled) unfulfilled.push_back(format_address(a));
  return {{"manifest_id", r.manifest_id},
          {"from", r.from_commit},
          {"to", r.to_commit},
          {"compliant", r.compliant},
          {"violations", to_json_array(r.violations)},
          {"unfulfilled", unfulfilled},
          {"counts",
           {{"total_changes", r.total_changes},
            {"allowed_changes", r.allowed_changes},
            {"violations", r.violations.size()},
            {"unfulfilled", r.unfulfilled.size()}}}};
}

Json to_json(const AuditEntry& e) {
  return {{"entry_id", e.entry_id},         {"actor", e.event.actor},         {"action", e.event.action},
          {"target", e.event.target},       {"timestamp", e.event.timestamp}, {"prev", e.prev_hash}};
}

Json to_json(const InventoryReport& report) {
  Json files = Json::array();
  for (const auto& f : report.spreadsheet_files) {
    files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"modified", f.modified}, {"format", f.format}});
  }
  Json histogram = Json::object();
  for (std::size_t i = 0; i < report.histogram.size(); ++i) {
    histogram[to_string(static_cast<SizeBucket>(i))] = report.histogram[i];
  }
  return {{"root", report.root},
          {"scanned_paths", report.scanned_paths},
          {"spreadsheet_files", std::move(files)},
          {"total_bytes", report.total_bytes},
          {"histogram", std::move(histogram)},
          {"warnings", report.warnings}};
}

Json commit_payload(const CommitOutcome& outcome, const std::vector<std::string>& ingest_warnings) {
  return {{"commit_id", outcome.record.commit_id},
          {"snapshot_hash", outcome.record.snapshot.hex()},
          {"diff_summary", to_json(outcome.summary)},
          {"firings", to_json_array(outcome.firings)},
          {"warnings", ingest_warnings}};
}

std::string serialize(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

WatchConfig watch_config_from_json(const Json& j) {
  WatchConfig config;
  if (!j.is_object() || !j.contains("input_regions") || !j["input_regions"].is_array()) {
    throw Error(ErrorCode::MalformedRegion, "watch config needs an \"input_regions\" array");
  }
  for (const auto& r : j["input_regions"]) {
    if (!r.is_string()) throw Error(ErrorCode::MalformedRegion, "input regions must be strings");
    config.input_regions.push_back(parse_region(r.get<std::string>()));
  }
  config.validate();
  return config;
}

std::string export_csv(const ExportTable& table) {
  std::string out;
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(display(row[i]));
    }
    out += "\r\n";
  }
  return out;
}

std::string to_jsonl(const Json& array) {
  std::string out;
  for (const auto& item : array) {
    out += serialize(item);
    out += '\n';
  }
  return out;
}

}  // namespace cellvault
