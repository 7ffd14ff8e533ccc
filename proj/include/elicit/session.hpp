#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "elicit/elicitation.hpp"
#include "elicit/error.hpp"
#include "elicit/evaluation.hpp"

namespace elicit {

enum class SessionPhase { Familiarization, Elicitation, Evaluation, Done };

const char* to_string(SessionPhase p) noexcept;

class NotReady : public Rejected {
 public:
  using Rejected::Rejected;
};

// Snapshot of everything that determines a session's behavior.
struct SessionConfig {
  std::string dataset_id;
  double epsilon = 0.05;
  EvalConfig eval;
};

nlohmann::json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const nlohmann::json& j);

// Result payload shared by the service and in-process runs.
nlohmann::json result_json(const LinearMetric& metric, const EvaluationReport& report);

struct PreferenceAck {
  std::string query_id;
  std::size_t answered = 0;  // position of this answer, 1-based
  bool duplicate = false;
  SessionPhase phase = SessionPhase::Elicitation;
};

// One session's state, built purely by applying events in order. Holds no
// locks and does no IO.
class SessionRecord {
 public:
  SessionRecord(std::string session_id, std::int64_t created_at, SessionConfig config,
                nlohmann::json questionnaire, std::shared_ptr<const QuerySet> query_set);

  const std::string& session_id() const noexcept { return session_id_; }
  std::int64_t created_at() const noexcept { return created_at_; }
  const SessionConfig& config() const noexcept { return config_; }
  SessionPhase phase() const noexcept { return phase_; }
  const nlohmann::json& questionnaire() const noexcept { return questionnaire_; }
  const nlohmann::json& familiarization_answers() const noexcept { return familiarization_; }
  const ElicitationState& elicitation() const noexcept { return elicitation_; }
  const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }
  const std::vector<Query>& eval_queries() const noexcept { return eval_queries_; }
  const std::optional<EvaluationReport>& report() const noexcept { return report_; }
  std::optional<LinearMetric> metric() const { return elicitation_.result(); }

  // The query a subject should answer now; nullptr outside the query phases.
  const Query* current_query() const noexcept;

  void complete_familiarization(nlohmann::json answers);

  // Returns the earlier ack for an identical resend without changing state.
  // Throws Rejected for a conflicting resend or any id other than the current
  // query, NotReady outside the query phases.
  std::optional<PreferenceAck> check_preference(const std::string& query_id, Choice choice) const;
  PreferenceAck apply_preference(const std::string& query_id, Choice choice,
                                 std::int64_t latency_ms, std::int64_t timestamp_ms);

  nlohmann::json result() const;  // NotReady before Done
  std::string transcript_jsonl() const;
  nlohmann::json snapshot() const;  // full state, for replay comparison

 private:
  std::string session_id_;
  std::int64_t created_at_;
  SessionConfig config_;
  nlohmann::json questionnaire_;
  nlohmann::json familiarization_;
  std::shared_ptr<const QuerySet> query_set_;
  SessionPhase phase_ = SessionPhase::Familiarization;
  ElicitationState elicitation_;
  std::vector<Query> eval_queries_;
  std::vector<OracleResponse> eval_responses_;
  std::vector<TranscriptEntry> transcript_;
  std::optional<EvaluationReport> report_;
};

struct ServiceOptions {
  std::filesystem::path data_dir;  // empty: in-memory only
  double default_epsilon = 0.05;
  std::size_t eval_queries = 15;
  double min_gap = 0.05;
  std::uint64_t base_seed = 0;
  Clock clock;  // defaults to the system clock
};

// Static Phase I content: questionnaire schema, task framing, practice items.
nlohmann::json familiarization_content(const QuerySet& qs);

// Sessions over prepared query sets. Each session is persisted as an
// append-only JSON-lines event log; constructing a service on an existing
// data directory replays every log. Calls for different sessions run
// concurrently; calls for one session are serialized.
class SessionService {
 public:
  SessionService(ServiceOptions options,
                 std::map<std::string, std::shared_ptr<const QuerySet>> datasets);
  ~SessionService();

  // Body keys (all optional): dataset_id, epsilon, eval_seed, questionnaire.
  nlohmann::json create_session(const nlohmann::json& request);
  nlohmann::json complete_familiarization(const std::string& id, const nlohmann::json& answers);
  nlohmann::json next_query(const std::string& id);
  nlohmann::json post_preference(const std::string& id, const std::string& query_id, Choice choice,
                                 std::int64_t latency_ms = 0);
  nlohmann::json get_result(const std::string& id);
  std::string transcript(const std::string& id);
  nlohmann::json snapshot(const std::string& id);

  std::vector<std::string> session_ids() const;
  const std::vector<std::string>& recovery_warnings() const noexcept { return warnings_; }

 private:
  struct Entry;
  std::shared_ptr<Entry> find(const std::string& id) const;
  void recover();
  std::int64_t now() const;

  ServiceOptions options_;
  std::map<std::string, std::shared_ptr<const QuerySet>> datasets_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::vector<std::string> warnings_;
};

}  // namespace elicit
