#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "hmo/engine.hpp"

namespace hmo {

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

// HTTP front end. Every non-2xx response body is {"code", "message"} with
// code one of BadRequest, NotFound, PortUnavailable, Internal.
class Service {
 public:
  explicit Service(Engine& engine);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Routes one request without going through a socket.
  ApiResponse dispatch(std::string_view method, std::string_view path, std::string_view body);

  /// Blocks until stop(). False if the address could not be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string& host);
  /// Serves on the port bound by bind_to_any_port until stop().
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  Engine& engine_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hmo
