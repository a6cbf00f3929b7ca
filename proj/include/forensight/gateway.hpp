#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "forensight/error.hpp"
#include "forensight/platform.hpp"

namespace httplib {
class Server;
}

namespace forensight {

struct RouteSpec {
  std::string method;  // GET | POST
  std::string path;    // OpenAPI template, e.g. /api/inferences/{id}
  bool requires_auth = true;
  std::string operation_id;
  std::string summary;
  int success_status = 200;
  std::vector<ErrorCode> errors;  // declared failures besides the auth trio
};

/// The public route table, in documentation order.
const std::vector<RouteSpec>& route_table();

/// OpenAPI 3 description of route_table(). Deterministic: serialising it
/// twice yields identical bytes.
nlohmann::json openapi_document();

/// HTTP/JSON front end over one Platform. Holds no per-request state; any
/// number of gateways in any number of processes may share a store.
class Gateway {
 public:
  explicit Gateway(Platform& platform);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port;
  /// throws bind_failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  Platform& platform_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace forensight
