#include "cellvault/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cellvault/api_json.hpp"
#include "cellvault/discover.hpp"
#include "cellvault/ingest.hpp"
#include "cellvault/pattern.hpp"

namespace cellvault {
namespace {

enum class Output { Text, Json, Jsonl };

std::string read_input_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_input_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::FormatError, path + " is not JSON: " + e.what());
  }
}

std::string lower_extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

IngestReport ingest_file(const std::string& path, const std::string& csv_sheet) {
  std::string bytes = read_input_file(path);
  if (lower_extension(path) == ".csv") {
    std::string name = csv_sheet.empty() ? std::filesystem::path(path).stem().string() : csv_sheet;
    IngestReport report;
    report.snapshot = WorkbookSnapshot(std::vector<Sheet>{ingest_csv(name, bytes)});
    report.source_format = SourceFormat::Csv;
    report.cell_count = report.snapshot.cell_count();
    return report;
  }
  return ingest_auto(bytes);
}

std::string show(const CellValue& v) { return v.is_empty() ? "(empty)" : display(v); }

std::string show(const std::optional<Cell>& cell) {
  if (!cell) return "-";
  std::string s = show(cell->value());
  if (cell->formula()) s += " [" + *cell->formula() + "]";
  return s;
}

// Whole-sheet records print as the (possibly quoted) sheet name.
std::string address_text(const CellAddress& a) {
  if (!a.is_whole_sheet()) return format_address(a);
  std::string text = format_address(CellAddress{a.sheet, 1, 1});
  return text.substr(0, text.size() - 3);
}

class Printer {
 public:
  Printer(std::ostream& out, Output mode) : out_(out), mode_(mode) {}

  bool machine() const { return mode_ != Output::Text; }

  // Machine modes print the payload; text mode defers to `text`.
  template <typename TextFn>
  void emit(const Json& payload, TextFn&& text) {
    if (mode_ == Output::Json) {
      out_ << serialize(payload) << '\n';
    } else if (mode_ == Output::Jsonl) {
      if (payload.is_array()) out_ << to_jsonl(payload);
      else out_ << serialize(payload) << '\n';
    } else {
      text(out_);
    }
  }

 private:
  std::ostream& out_;
  Output mode_;
};

void print_summary(std::ostream& os, const DiffSummary& s) {
  os << s.total << " changes, " << s.exceptional_count << " exceptional\n";
  for (auto kind : kAllChangeKinds) {
    auto it = s.by_kind.find(kind);
    if (it != s.by_kind.end() && it->second) os << "  " << to_string(kind) << ": " << it->second << '\n';
  }
}

void print_firing(std::ostream& os, const AlertFiring& f) {
  os << "alert " << f.rule_id << " at " << format_address(f.address) << ": " << show(f.old_value) << " -> "
     << show(f.new_value) << " (" << to_string(f.pattern) << ")\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Version control, diff and alerting for operational spreadsheets", "cellvault"};
  app.require_subcommand(1);

  std::string store_root = env("CELLVAULT_STORE").value_or("cellvault-store");
  std::string output_name = "text";
  std::string actor = env("USER").value_or("cli");
  auto* store_opt = app.add_option("--store", store_root, "Store root (env CELLVAULT_STORE)");
  app.add_option("--output", output_name, "Output mode")->check(CLI::IsMember({"text", "json", "jsonl"}));
  app.add_option("--actor", actor, "Actor recorded in the audit log");

  std::string workbook, file, author, message, source, sheet, watch_file, from, to, cell, region, at = "latest",
      format = "csv", commit_ref, rule_file, manifest_file, manifest_id, out_file, discover_root, config_file, listen,
      token;
  std::size_t window = 4, retire_window = RetirementReport::kDefaultWindow;
  bool summary_only = false;
  std::vector<std::string> extensions;

  auto* init = app.add_subcommand("init", "Create a store");

  auto* commit = app.add_subcommand("commit", "Commit a workbook version (JSON, .xlsx or .csv)");
  commit->add_option("--workbook", workbook)->required();
  commit->add_option("--file", file)->required();
  commit->add_option("--author", author)->required();
  commit->add_option("--message", message);
  commit->add_option("--source", source, "Defaults to the file path");
  commit->add_option("--sheet", sheet, "Sheet name for CSV input (defaults to the file stem)");
  commit->add_option("--watch", watch_file, "JSON file {\"input_regions\": [...]}");

  auto* log = app.add_subcommand("log", "List the lineage");
  log->add_option("--workbook", workbook)->required();

  auto* diff_cmd = app.add_subcommand("diff", "Cell-level changes between two commits");
  diff_cmd->add_option("--workbook", workbook)->required();
  diff_cmd->add_option("--from", from)->required();
  diff_cmd->add_option("--to", to)->required();
  diff_cmd->add_option("--watch", watch_file, "JSON file {\"input_regions\": [...]}");
  diff_cmd->add_flag("--summary", summary_only, "Print counts only");

  auto* history = app.add_subcommand("history", "Values of one cell over recent commits");
  history->add_option("--workbook", workbook)->required();
  history->add_option("--cell", cell, "e.g. 'Sheet1!B2'")->required();
  history->add_option("--window", window)->check(CLI::PositiveNumber);

  auto* rules = app.add_subcommand("rules", "Alert rules");
  rules->require_subcommand(1);
  auto* rules_add = rules->add_subcommand("add", "Add a rule from a JSON file");
  rules_add->add_option("--workbook", workbook)->required();
  rules_add->add_option("--rule", rule_file)->required();
  auto* rules_list = rules->add_subcommand("list", "List rules");
  rules_list->add_option("--workbook", workbook)->required();

  auto* alerts = app.add_subcommand("alerts", "List alert firings");
  alerts->add_option("--workbook", workbook)->required();

  auto* export_cmd = app.add_subcommand("export", "Export a region at a commit");
  export_cmd->add_option("--workbook", workbook)->required();
  export_cmd->add_option("--region", region, "e.g. 'Sheet1!A1:C10'")->required();
  export_cmd->add_option("--at", at, "Commit id or 'latest'");
  export_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  auto* restore = app.add_subcommand("restore", "Write the canonical bytes of a past version");
  restore->add_option("--workbook", workbook)->required();
  restore->add_option("--commit", commit_ref)->required();
  restore->add_option("--out", out_file, "Defaults to stdout");

  auto* report = app.add_subcommand("report", "Reports");
  report->require_subcommand(1);
  auto* retirement = report->add_subcommand("retirement", "Formula volatility and retirement readiness");
  retirement->add_option("--workbook", workbook)->required();
  retirement->add_option("--window", retire_window)->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Check a commit range against a change manifest");
  verify->add_option("--workbook", workbook)->required();
  auto* manifest_group = verify->add_option_group("manifest");
  manifest_group->add_option("--manifest", manifest_file, "Manifest JSON file (registered on first use)");
  manifest_group->add_option("--manifest-id", manifest_id, "A registered manifest");
  manifest_group->require_option(1);
  verify->add_option("--from", from);
  verify->add_option("--to", to);

  auto* discover_cmd = app.add_subcommand("discover", "Inventory spreadsheet files under a directory");
  discover_cmd->add_option("root", discover_root)->required();
  discover_cmd->add_option("--ext", extensions, "Extensions to match (default .xlsx .xls .csv)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_file);
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--token", token, "Bearer token (env CELLVAULT_TOKEN)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 2;
  }

  const Output mode = output_name == "json" ? Output::Json : output_name == "jsonl" ? Output::Jsonl : Output::Text;
  Printer printer(out, mode);

  try {
    if (init->parsed()) {
      auto store = VersionStore::init(store_root);
      printer.emit(Json{{"store", store.root().string()}},
                   [&](std::ostream& os) { os << "initialized store at " << store.root().string() << '\n'; });
      return 0;
    }

    if (discover_cmd->parsed()) {
      DiscoverOptions options;
      if (!extensions.empty()) {
        options.extensions.clear();
        for (auto e : extensions) {
          std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
          options.extensions.push_back(e.empty() || e[0] == '.' ? e : "." + e);
        }
      }
      auto inv = discover(discover_root, options);
      printer.emit(to_json(inv), [&](std::ostream& os) {
        for (const auto& f : inv.spreadsheet_files) {
          os << f.bytes << '\t' << f.modified << '\t' << f.format << '\t' << f.path << '\n';
        }
        os << inv.spreadsheet_files.size() << " spreadsheet files, " << inv.total_bytes << " bytes, "
           << inv.scanned_paths << " paths scanned\n";
        for (std::size_t i = 0; i < inv.histogram.size(); ++i) {
          os << "  " << to_string(static_cast<SizeBucket>(i)) << ": " << inv.histogram[i] << '\n';
        }
      });
      for (const auto& w : inv.warnings) err << "warning: " << w << '\n';
      return 0;
    }

    if (serve->parsed()) {
      auto config = load_service_config(config_file.empty() ? std::nullopt
                                                             : std::optional<std::filesystem::path>(config_file),
                                        env);
      if (store_opt->count() > 0) config.store = store_root;
      if (!listen.empty()) {
        auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::FormatError, "--listen must be host:port");
        config.host = listen.substr(0, colon);
        config.port = std::stoi(listen.substr(colon + 1));
      }
      if (!token.empty()) config.token = token;
      Repository repo{VersionStore(config.store)};
      Service service(repo, config);
      int port = service.bind();
      err << "listening on " << config.host << ':' << port << '\n';
      service.run();
      return 0;
    }

    Repository repo{VersionStore(store_root)};

    WatchConfig watch;
    if (!watch_file.empty()) watch = watch_config_from_json(read_json_file(watch_file));

    if (commit->parsed()) {
      auto ingest = ingest_file(file, sheet);
      auto outcome = repo.commit(workbook, ingest.snapshot, author, message, source.empty() ? file : source, watch);
      for (const auto& w : ingest.warnings) err << "warning: " << w << '\n';
      printer.emit(commit_payload(outcome, ingest.warnings), [&](std::ostream& os) {
        os << outcome.record.commit_id << '\n';
        print_summary(err, outcome.summary);
        for (const auto& f : outcome.firings) print_firing(err, f);
      });
      return 0;
    }

    if (log->parsed()) {
      auto records = repo.store().log(workbook);
      printer.emit(to_json(records), [&](std::ostream& os) {
        for (const auto& r : records) {
          os << r.commit_id << ' ' << r.timestamp << ' ' << r.author;
          if (!r.message.empty()) os << ' ' << r.message;
          os << '\n';
        }
      });
      return 0;
    }

    if (diff_cmd->parsed()) {
      auto changes = repo.diff(workbook, from, to, watch);
      if (summary_only) {
        auto s = summarize(changes);
        printer.emit(to_json(s), [&](std::ostream& os) { print_summary(os, s); });
        return 0;
      }
      printer.emit(to_json(changes), [&](std::ostream& os) {
        for (const auto& c : changes) {
          os << to_string(c.kind) << ' ' << address_text(c.address) << ": " << show(c.old_cell) << " -> "
             << show(c.new_cell);
          if (c.policy) os << " (" << to_string(*c.policy) << ')';
          os << '\n';
        }
      });
      return 0;
    }

    if (history->parsed()) {
      auto series = repo.store().cell_history(workbook, parse_address(cell), window);
      printer.emit(to_json(series), [&](std::ostream& os) {
        std::vector<CellValue> values;
        for (const auto& p : series.points) {
          os << p.commit_id.substr(0, 12) << ' ' << p.timestamp << ' ' << (p.changed ? '*' : ' ') << ' '
             << show(p.value);
          if (p.formula) os << " [" << *p.formula << ']';
          os << '\n';
          values.push_back(p.value);
        }
        if (values.size() >= 2) os << "pattern: " << to_string(classify_pattern(values)) << '\n';
      });
      return 0;
    }

    if (rules_add->parsed()) {
      auto rule = rule_from_json(read_json_file(rule_file));
      repo.add_rule(workbook, rule, actor);
      printer.emit(to_json(rule), [&](std::ostream& os) { os << "added rule " << rule.rule_id << '\n'; });
      return 0;
    }

    if (rules_list->parsed()) {
      auto list = repo.rules(workbook);
      printer.emit(to_json_array(list), [&](std::ostream& os) {
        for (const auto& r : list) os << r.rule_id << ' ' << to_string(r.kind) << ' ' << format_region(r.target) << '\n';
      });
      return 0;
    }

    if (alerts->parsed()) {
      auto firings = repo.alerts(workbook);
      printer.emit(to_json_array(firings), [&](std::ostream& os) {
        for (const auto& f : firings) {
          os << f.commit_id.substr(0, 12) << ' ';
          print_firing(os, f);
        }
      });
      return 0;
    }

    if (export_cmd->parsed()) {
      auto table = repo.store().export_region(workbook, at, parse_region(region));
      if (format == "csv") {
        out << export_csv(table);
      } else {
        out << serialize(to_json(table)) << '\n';
      }
      return 0;
    }

    if (restore->parsed()) {
      auto bytes = repo.restore(workbook, commit_ref, actor);
      if (out_file.empty()) {
        out << bytes;
      } else {
        std::ofstream f(out_file, std::ios::binary | std::ios::trunc);
        f << bytes;
        if (!f.flush()) throw Error(ErrorCode::ConstraintError, "cannot write " + out_file);
        err << "restored " << commit_ref << " to " << out_file << '\n';
      }
      return 0;
    }

    if (retirement->parsed()) {
      auto r = retirement_report(repo.store(), workbook, retire_window);
      printer.emit(to_json(r), [&](std::ostream& os) {
        os << to_string(r.verdict) << ": " << r.formula_change_commits << " of " << r.commits_considered
           << " transitions changed formulas or structure (volatility " << r.volatility << ", window " << r.window
           << ")\n";
      });
      return 0;
    }

    if (verify->parsed()) {
      ChangeManifest manifest;
      if (!manifest_file.empty()) {
        manifest = manifest_from_json(read_json_file(manifest_file));
        try {
          auto existing = repo.manifest(workbook, manifest.manifest_id);
          if (to_json(existing) != to_json(manifest)) {
            throw Error(ErrorCode::ManifestInvalid,
                        "manifest '" + manifest.manifest_id + "' is registered with different content");
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NotFound) throw;
          repo.add_manifest(workbook, manifest, actor);
        }
      } else {
        manifest = repo.manifest(workbook, manifest_id);
      }
      auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
      auto report_ = repo.verify(workbook, manifest, opt(from), opt(to), actor);
      printer.emit(to_json(report_), [&](std::ostream& os) {
        os << (report_.compliant ? "compliant" : "NOT compliant") << ": " << report_.total_changes << " changes, "
           << report_.allowed_changes << " approved, " << report_.violations.size() << " violations, "
           << report_.unfulfilled.size() << " unfulfilled\n";
        for (const auto& v : report_.violations) {
          os << "  violation " << to_string(v.kind) << ' ' << address_text(v.address) << '\n';
        }
        for (const auto& u : report_.unfulfilled) os << "  unfulfilled " << format_address(u) << '\n';
      });
      return 0;
    }
  } catch (const Error& e) {
    err << "cellvault: " << api_error_for(e.code()).code << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "cellvault: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace cellvault
