#include "elicit/http_api.hpp"

#include <httplib.h>

namespace elicit {

using nlohmann::json;

struct HttpApi::Impl {
  explicit Impl(SessionService& s) : service(s) {}

  SessionService& service;
  httplib::Server server;
};

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const char* kind, const std::string& msg,
                json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = msg;
  send_json(res, extra, status);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

// Runs a handler, mapping library errors onto HTTP statuses.
template <class F>
void guarded(httplib::Response& res, SessionService& service, const std::string& session_id,
             F&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const NotReady& e) {
    send_error(res, 409, "not_ready", e.what());
  } catch (const Rejected& e) {
    json hint = json::object();
    if (!session_id.empty()) {
      try {
        auto q = service.next_query(session_id);
        if (q.value("kind", "") == "query") hint["current_query_id"] = q["query_id"];
      } catch (const Error&) {
      }
    }
    send_error(res, 409, "rejected", e.what(), hint);
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const Error& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

HttpApi::HttpApi(SessionService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });

  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, svc, "", [&] { send_json(res, svc.create_session(parse_body(req)), 201); });
  });
  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/familiarization)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             guarded(res, svc, id, [&] {
               auto body = parse_body(req);
               send_json(res, svc.complete_familiarization(id, body.value("answers", json::object())));
             });
           });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/query)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, svc, id, [&] { send_json(res, svc.next_query(id)); });
          });
  srv.Post(R"(/sessions/([0-9A-Za-z_-]+)/preference)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             guarded(res, svc, id, [&] {
               auto body = parse_body(req);
               send_json(res, svc.post_preference(
                                  id, body.at("query_id").get<std::string>(),
                                  choice_from_string(body.at("choice").get<std::string>()),
                                  body.value("latency_ms", std::int64_t{0})));
             });
           });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/result)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, svc, id, [&] { send_json(res, svc.get_result(id)); });
          });
  srv.Get(R"(/sessions/([0-9A-Za-z_-]+)/transcript)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, svc, id, [&] {
              res.set_content(svc.transcript(id), "application/x-ndjson");
            });
          });
  if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw Error("could not bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port))
    throw Error("could not bind " + host + ":" + std::to_string(port) +
                " (address in use or not permitted)");
  return port;
}

void HttpApi::serve() { impl_->server.listen_after_bind(); }

void HttpApi::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpApi::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace elicit
