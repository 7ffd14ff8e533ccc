#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "elicit/session.hpp"

namespace elicit {

// JSON-over-HTTP front end for a SessionService.
//
//   POST /sessions                          create; body: SessionService::create_session
//   POST /sessions/{id}/familiarization     record Phase I answers, start elicitation
//   GET  /sessions/{id}/query               next query, familiarization notice, or result
//   POST /sessions/{id}/preference          {"query_id", "choice": "left"|"right", "latency_ms"?}
//   GET  /sessions/{id}/result              409 until the session is done
//   GET  /sessions/{id}/transcript          JSON lines
//
// Errors are {"error": kind, "message": text} with 400/404/409 status.
class HttpApi {
 public:
  explicit HttpApi(SessionService& service, std::filesystem::path static_dir = {});
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Binds without serving. Port 0 picks a free port. Throws Error when the
  // address cannot be bound. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void serve();
  // Blocks until serve() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elicit
