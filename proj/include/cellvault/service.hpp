#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "cellvault/error.hpp"
#include "cellvault/repository.hpp"

namespace cellvault {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store = "cellvault-store";
  /// Empty disables authentication.
  std::string token;
  std::size_t body_limit = std::size_t{256} * 1024 * 1024;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Reads an optional JSON file `{"listen":"host:port","store":..,"token":..,
/// "body_limit":..}`, then applies CELLVAULT_LISTEN, CELLVAULT_STORE,
/// CELLVAULT_TOKEN and CELLVAULT_BODY_LIMIT. Throws FormatError.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env = process_env);

struct ApiErrorInfo {
  int status;
  std::string code;
};
/// HTTP status and machine code for a library error.
ApiErrorInfo api_error_for(ErrorCode code);

/// HTTP front end over a Repository; all routes live under /api/v1.
class Service {
 public:
  Service(Repository& repository, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to config.port (0 picks a free port) and returns the bound port.
  /// Throws ConstraintError when the address cannot be bound.
  int bind();
  /// Serves until stop() is called.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cellvault
