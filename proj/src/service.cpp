#include "cellvault/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cellvault/api_json.hpp"
#include "cellvault/ingest.hpp"
#include "httplib.h"

namespace cellvault {
namespace {

const char* const kJson = "application/json";

struct HttpError {
  int status;
  std::string code;
  std::string detail;
};

Json api_error_body(int status, const std::string& code, const std::string& detail) {
  return {{"status", status}, {"code", code}, {"detail", detail}};
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& detail) {
  res.status = status;
  res.set_content(serialize(api_error_body(status, code, detail)), kJson);
}

void send_json(httplib::Response& res, const Json& payload, int status = 200) {
  res.status = status;
  res.set_content(serialize(payload), kJson);
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

std::string required_param(const httplib::Request& req, const char* key) {
  auto v = param(req, key);
  if (!v || v->empty()) throw HttpError{400, "BAD_REQUEST", std::string("missing query parameter '") + key + "'"};
  return *v;
}

std::size_t positive_param(const httplib::Request& req, const char* key, std::size_t fallback) {
  auto v = param(req, key);
  if (!v) return fallback;
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || p != v->data() + v->size() || out == 0) {
    throw HttpError{400, "BAD_REQUEST", std::string("'") + key + "' must be a positive integer"};
  }
  return out;
}

std::string actor_of(const httplib::Request& req) {
  if (auto a = param(req, "actor"); a && !a->empty()) return *a;
  if (req.has_header("X-Actor")) return req.get_header_value("X-Actor");
  return "api";
}

// Watch regions are passed as repeated `input=` parameters.
WatchConfig watch_of(const httplib::Request& req) {
  WatchConfig watch;
  for (std::size_t i = 0, n = req.get_param_value_count("input"); i < n; ++i) {
    watch.input_regions.push_back(parse_region(req.get_param_value("input", i)));
  }
  watch.validate();
  return watch;
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("request body is not JSON: ") + e.what());
  }
}

bool equal_constant_time(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

std::size_t parse_size(const std::string& text, const char* what) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || p != text.data() + text.size() || out == 0) {
    throw Error(ErrorCode::FormatError, std::string("invalid ") + what + ": '" + text + "'");
  }
  return out;
}

void apply_listen(ServiceConfig& config, const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::FormatError, "listen must be host:port, got '" + listen + "'");
  std::size_t port = colon + 1 < listen.size() ? parse_size(listen.substr(colon + 1), "port") : 0;
  if (listen.substr(colon + 1) == "0") port = 0;
  if (port > 65535) throw Error(ErrorCode::FormatError, "port out of range in '" + listen + "'");
  config.host = listen.substr(0, colon);
  config.port = static_cast<int>(port);
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  ServiceConfig config;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read config file " + file->string());
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::FormatError, std::string("config file is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::FormatError, "config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "listen" && value.is_string()) {
        apply_listen(config, value.get<std::string>());
      } else if (key == "store" && value.is_string()) {
        config.store = value.get<std::string>();
      } else if (key == "token" && value.is_string()) {
        config.token = value.get<std::string>();
      } else if (key == "body_limit" && value.is_number_unsigned() && value.get<std::size_t>() > 0) {
        config.body_limit = value.get<std::size_t>();
      } else {
        throw Error(ErrorCode::FormatError, "unknown or mistyped config key '" + key + "'");
      }
    }
  }
  if (auto v = env("CELLVAULT_LISTEN")) apply_listen(config, *v);
  if (auto v = env("CELLVAULT_STORE")) config.store = *v;
  if (auto v = env("CELLVAULT_TOKEN")) config.token = *v;
  if (auto v = env("CELLVAULT_BODY_LIMIT")) config.body_limit = parse_size(*v, "CELLVAULT_BODY_LIMIT");
  return config;
}

ApiErrorInfo api_error_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return {404, "NOT_FOUND"};
    case ErrorCode::PathNotFound: return {404, "PATH_NOT_FOUND"};
    case ErrorCode::FormatError: return {400, "FORMAT_ERROR"};
    case ErrorCode::ConstraintError: return {400, "CONSTRAINT_ERROR"};
    case ErrorCode::MalformedAddress: return {400, "MALFORMED_ADDRESS"};
    case ErrorCode::MalformedRegion: return {400, "MALFORMED_REGION"};
    case ErrorCode::UnsupportedFeature: return {415, "UNSUPPORTED_FEATURE"};
    case ErrorCode::ConcurrentWriter: return {409, "CONFLICT"};
    case ErrorCode::DuplicateRuleId: return {409, "DUPLICATE_RULE_ID"};
    case ErrorCode::RuleInvalid: return {400, "RULE_INVALID"};
    case ErrorCode::ManifestInvalid: return {400, "MANIFEST_INVALID"};
    case ErrorCode::WindowTooShort: return {400, "WINDOW_TOO_SHORT"};
    case ErrorCode::SeriesTooShort: return {400, "SERIES_TOO_SHORT"};
    case ErrorCode::NonNumericSeries: return {400, "NON_NUMERIC_SERIES"};
    case ErrorCode::LengthMismatch: return {400, "LENGTH_MISMATCH"};
    case ErrorCode::StoreCorrupt: return {500, "STORE_CORRUPT"};
  }
  return {500, "INTERNAL"};
}

struct Service::Impl {
  Repository& repo;
  ServiceConfig config;
  httplib::Server server;

  Impl(Repository& r, ServiceConfig c) : repo(r), config(std::move(c)) { install(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static httplib::Server::Handler wrap(Handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.code, e.detail);
      } catch (const Error& e) {
        auto info = api_error_for(e.code());
        send_error(res, info.status, info.code, e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "FORMAT_ERROR", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "INTERNAL", e.what());
      }
    };
  }

  void install();
};

void Service::Impl::install() {
  server.set_payload_max_length(config.body_limit);

  server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (config.token.empty() || req.path == "/api/v1/health") return httplib::Server::HandlerResponse::Unhandled;
    const std::string header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.compare(0, prefix.size(), prefix) == 0 &&
        equal_constant_time(header.substr(prefix.size()), config.token)) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    res.set_header("WWW-Authenticate", "Bearer");
    send_error(res, 401, "UNAUTHORIZED", "missing or invalid bearer token");
    return httplib::Server::HandlerResponse::Handled;
  });

  // Fills in an ApiError for responses httplib produced itself (unmatched
  // routes, oversized bodies, malformed requests).
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty() && res.get_header_value("Content-Type") == kJson) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    std::string code = "HTTP_ERROR";
    std::string detail = httplib::status_message(res.status);
    if (res.status == 404) {
      code = "NOT_FOUND";
      detail = "no route for " + req.method + " " + req.path;
    } else if (res.status == 413) {
      code = "PAYLOAD_TOO_LARGE";
      detail = "request body exceeds the configured limit";
    } else if (res.status == 400) {
      code = "BAD_REQUEST";
    }
    send_error(res, res.status, code, detail);
    return httplib::Server::HandlerResponse::Handled;
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send_error(res, 500, "INTERNAL", "unhandled server error");
  });

  const std::string wb = R"(/api/v1/workbooks/([^/]+))";

  server.Get("/api/v1/health", wrap([](const auto&, auto& res) { send_json(res, {{"status", "ok"}}); }));

  server.Get("/api/v1/workbooks", wrap([this](const auto&, auto& res) { send_json(res, repo.store().workbooks()); }));

  server.Post(wb + "/commits", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string wid = req.matches[1];
    auto watch = watch_of(req);
    IngestReport report;
    if (req.get_header_value("Content-Type").rfind("text/csv", 0) == 0) {
      report.snapshot = WorkbookSnapshot(std::vector<Sheet>{ingest_csv(param(req, "sheet").value_or("Sheet1"), req.body)});
      report.source_format = SourceFormat::Csv;
      report.cell_count = report.snapshot.cell_count();
    } else {
      report = ingest_auto(req.body);
    }
    auto author = param(req, "author").value_or(actor_of(req));
    auto outcome = repo.commit(wid, report.snapshot, author, param(req, "message").value_or(""),
                               param(req, "source").value_or(std::string(to_string(report.source_format))), watch);
    send_json(res, commit_payload(outcome, report.warnings), 201);
  }));

  server.Get(wb + "/commits", wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json(repo.store().log(req.matches[1])));
  }));

  server.Get(wb + "/diff", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto changes = repo.diff(req.matches[1], required_param(req, "from"), required_param(req, "to"), watch_of(req));
    if (param(req, "view").value_or("records") == "summary") {
      send_json(res, to_json(summarize(changes)));
    } else {
      send_json(res, to_json(changes));
    }
  }));

  server.Get(wb + R"(/cells/([^/]+)/([^/]+)/history)", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto pos = parse_a1(req.matches[3].str());
    CellAddress address{req.matches[2], pos.row, pos.col};
    send_json(res, to_json(repo.store().cell_history(req.matches[1], address, positive_param(req, "window", 4))));
  }));

  server.Get(wb + "/rules", wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json_array(repo.rules(req.matches[1])));
  }));

  server.Post(wb + "/rules", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto rule = rule_from_json(parse_body(req));
    repo.add_rule(req.matches[1], rule, actor_of(req));
    send_json(res, to_json(rule), 201);
  }));

  server.Get(wb + "/alerts", wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json_array(repo.alerts(req.matches[1])));
  }));

  server.Post(wb + "/restore", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (!body.is_object() || !body.contains("commit_id") || !body["commit_id"].is_string()) {
      throw Error(ErrorCode::FormatError, "restore body must be {\"commit_id\": \"...\"}");
    }
    const std::string wid = req.matches[1];
    const std::string commit_id = body["commit_id"].get<std::string>();
    auto bytes = repo.restore(wid, commit_id, actor_of(req));
    res.set_header("X-Snapshot-Hash", repo.store().find_commit(wid, commit_id).snapshot.hex());
    res.status = 200;
    res.set_content(std::move(bytes), kJson);
  }));

  server.Get(wb + "/export", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto region = parse_region(required_param(req, "region"));
    auto table = repo.store().export_region(req.matches[1], param(req, "at").value_or("latest"), region);
    auto format = param(req, "format").value_or("json");
    if (format == "csv") {
      res.status = 200;
      res.set_content(export_csv(table), "text/csv");
    } else if (format == "json") {
      send_json(res, to_json(table));
    } else {
      throw HttpError{400, "BAD_REQUEST", "format must be json or csv"};
    }
  }));

  server.Get(wb + "/reports/retirement", wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json(retirement_report(repo.store(), req.matches[1], positive_param(req, "window", 10))));
  }));

  server.Post(wb + "/manifests", wrap([this](const httplib::Request& req, httplib::Response& res) {
    auto manifest = manifest_from_json(parse_body(req));
    repo.add_manifest(req.matches[1], manifest, actor_of(req));
    send_json(res, to_json(manifest), 201);
  }));

  server.Get(wb + "/manifests/([^/]+)", wrap([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, to_json(repo.manifest(req.matches[1], req.matches[2])));
  }));

  server.Get(wb + "/compliance", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string wid = req.matches[1];
    auto manifest = repo.manifest(wid, required_param(req, "manifest"));
    send_json(res, to_json(repo.verify(wid, manifest, param(req, "from"), param(req, "to"), actor_of(req))));
  }));

  server.Get(wb + "/audit", wrap([this](const httplib::Request& req, httplib::Response& res) {
    AuditFilter filter{param(req, "actor"), param(req, "action"), param(req, "target")};
    send_json(res, to_json_array(repo.audit(req.matches[1], filter)));
  }));
}

Service::Service(Repository& repository, ServiceConfig config)
    : impl_(std::make_unique<Impl>(repository, std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  auto& cfg = impl_->config;
  if (cfg.port == 0) {
    int port = impl_->server.bind_to_any_port(cfg.host);
    if (port < 0) throw Error(ErrorCode::ConstraintError, "cannot bind " + cfg.host);
    return port;
  }
  if (!impl_->server.bind_to_port(cfg.host, cfg.port)) {
    throw Error(ErrorCode::ConstraintError, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  }
  return cfg.port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace cellvault
