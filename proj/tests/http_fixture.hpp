#pragma once

#include <httplib.h>

#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "elicit/http_api.hpp"
#include "elicit/oracle.hpp"

namespace http_fixture {

// Serves an HttpApi on a free loopback port for the lifetime of the object.
class Server {
 public:
  explicit Server(elicit::SessionService& svc) : api_(svc) {
    port_ = api_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { api_.serve(); });
    api_.wait_until_ready();
  }
  ~Server() {
    api_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  elicit::HttpApi api_;
  int port_ = 0;
  std::thread thread_;
};

inline nlohmann::json body(const httplib::Result& r) {
  if (!r) throw std::runtime_error("http request failed: " + httplib::to_string(r.error()));
  return nlohmann::json::parse(r->body);
}

struct HttpRun {
  std::string session_id;
  std::vector<nlohmann::json> payloads;  // every GET /query with kind "query"
  nlohmann::json result;
  std::string transcript;
};

// Creates a session, skips through familiarization, and answers every query
// from the script.
inline HttpRun run_scripted(httplib::Client& cli, const std::vector<elicit::Choice>& script,
                            std::uint64_t eval_seed) {
  HttpRun run;
  auto created = cli.Post("/sessions", nlohmann::json{{"eval_seed", eval_seed}}.dump(),
                          "application/json");
  if (!created || created->status != 201) throw std::runtime_error("create failed");
  run.session_id = body(created)["session_id"];
  const std::string base = "/sessions/" + run.session_id;
  auto fam = cli.Post(base + "/familiarization", R"({"answers":{}})", "application/json");
  if (!fam || fam->status != 200) throw std::runtime_error("familiarization failed");
  for (std::size_t k = 0;; ++k) {
    auto q = body(cli.Get(base + "/query"));
    if (q["kind"] != "query") break;
    if (k >= script.size()) throw std::runtime_error("script exhausted");
    run.payloads.push_back(q);
    nlohmann::json pref{{"query_id", q["query_id"]},
                        {"choice", elicit::to_string(script[k])},
                        {"latency_ms", 0}};
    auto r = cli.Post(base + "/preference", pref.dump(), "application/json");
    if (!r || r->status != 200) throw std::runtime_error("preference failed");
  }
  auto result = cli.Get(base + "/result");
  if (!result || result->status != 200) throw std::runtime_error("result not available");
  run.result = nlohmann::json::parse(result->body);
  run.transcript = cli.Get(base + "/transcript")->body;
  return run;
}

}  // namespace http_fixture
