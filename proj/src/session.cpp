#include "elicit/session.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "elicit/random.hpp"

namespace elicit {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(SessionPhase p) noexcept {
  switch (p) {
    case SessionPhase::Familiarization: return "familiarization";
    case SessionPhase::Elicitation: return "elicitation";
    case SessionPhase::Evaluation: return "evaluation";
    case SessionPhase::Done: return "done";
  }
  return "?";
}

json to_json(const SessionConfig& c) {
  return {{"dataset_id", c.dataset_id},
          {"epsilon", c.epsilon},
          {"eval_queries", c.eval.n_queries},
          {"min_gap", c.eval.min_gap},
          {"eval_seed", c.eval.seed}};
}

SessionConfig session_config_from_json(const json& j) {
  SessionConfig c;
  c.dataset_id = j.at("dataset_id").get<std::string>();
  c.epsilon = j.at("epsilon").get<double>();
  c.eval.n_queries = j.at("eval_queries").get<std::size_t>();
  c.eval.min_gap = j.at("min_gap").get<double>();
  c.eval.seed = j.at("eval_seed").get<std::uint64_t>();
  return c;
}

json result_json(const LinearMetric& metric, const EvaluationReport& report) {
  return {{"metric", to_json(metric)},
          {"metric_display", display_string(metric)},
          {"m", report.m_display()},
          {"m_value", report.m_value},
          {"evaluation", to_json(report)}};
}

SessionRecord::SessionRecord(std::string session_id, std::int64_t created_at,
                             SessionConfig config, json questionnaire,
                             std::shared_ptr<const QuerySet> query_set)
    : session_id_(std::move(session_id)),
      created_at_(created_at),
      config_(std::move(config)),
      questionnaire_(std::move(questionnaire)),
      familiarization_(nullptr),
      query_set_(query_set),
      elicitation_(ElicitationState::start(std::move(query_set), config_.epsilon)) {
  if (config_.eval.n_queries == 0) throw ValidationError("eval_queries must be at least 1");
}

const Query* SessionRecord::current_query() const noexcept {
  switch (phase_) {
    case SessionPhase::Elicitation: return elicitation_.next_query();
    case SessionPhase::Evaluation: return &eval_queries_[eval_responses_.size()];
    default: return nullptr;
  }
}

void SessionRecord::complete_familiarization(json answers) {
  if (phase_ != SessionPhase::Familiarization)
    throw Rejected("familiarization already completed");
  familiarization_ = std::move(answers);
  phase_ = SessionPhase::Elicitation;
}

std::optional<PreferenceAck> SessionRecord::check_preference(const std::string& query_id,
                                                             Choice choice) const {
  for (std::size_t i = 0; i < transcript_.size(); ++i) {
    const auto& e = transcript_[i];
    if (e.query.query_id != query_id) continue;
    if (e.response.choice != choice)
      throw Rejected("query '" + query_id + "' was already answered '" +
                     to_string(e.response.choice) + "'");
    return PreferenceAck{query_id, i + 1, true, phase_};
  }
  if (phase_ == SessionPhase::Familiarization)
    throw NotReady("session is in familiarization; no query has been served");
  if (phase_ == SessionPhase::Done) throw Rejected("session is done");
  const Query* current = current_query();
  if (!current || current->query_id != query_id)
    throw Rejected("query '" + query_id + "' is not the current query" +
                   (current ? "; current is '" + current->query_id + "'" : std::string()));
  return std::nullopt;
}

PreferenceAck SessionRecord::apply_preference(const std::string& query_id, Choice choice,
                                              std::int64_t latency_ms, std::int64_t timestamp_ms) {
  if (auto dup = check_preference(query_id, choice)) return *dup;

  const Query query = *current_query();
  OracleResponse response{query_id, choice, latency_ms};
  if (phase_ == SessionPhase::Elicitation) {
    elicitation_.submit(response);
    transcript_.push_back({query, response, timestamp_ms});
    if (elicitation_.converged()) {
      eval_queries_ = generate_eval_queries(*query_set_, config_.eval);
      phase_ = SessionPhase::Evaluation;
    }
  } else {
    eval_responses_.push_back(response);
    transcript_.push_back({query, response, timestamp_ms});
    if (eval_responses_.size() == eval_queries_.size()) {
      report_ = compute_m(*elicitation_.result(), eval_queries_, eval_responses_);
      phase_ = SessionPhase::Done;
    }
  }
  return PreferenceAck{query_id, transcript_.size(), false, phase_};
}

json SessionRecord::result() const {
  if (phase_ != SessionPhase::Done)
    throw NotReady(std::string("result not ready; session is in ") + to_string(phase_));
  return result_json(*elicitation_.result(), *report_);
}

std::string SessionRecord::transcript_jsonl() const {
  return elicit::transcript_jsonl(transcript_);
}

json SessionRecord::snapshot() const {
  json evalq = json::array();
  for (const auto& q : eval_queries_) evalq.push_back(to_json(q));
  json evalr = json::array();
  for (const auto& r : eval_responses_) evalr.push_back({r.query_id, to_string(r.choice)});
  json transcript = json::array();
  for (const auto& e : transcript_) transcript.push_back(to_json(e));
  return {{"session_id", session_id_},
          {"created_at", created_at_},
          {"config", to_json(config_)},
          {"questionnaire", questionnaire_},
          {"familiarization", familiarization_},
          {"phase", to_string(phase_)},
          {"elicitation", elicitation_.to_json()},
          {"eval_queries", evalq},
          {"eval_responses", evalr},
          {"transcript", transcript},
          {"report", report_ ? to_json(*report_) : json(nullptr)}};
}

json familiarization_content(const QuerySet& qs) {
  auto example = [&](const char* label, double tau) {
    const auto& counts = qs.counts()[qs.snap(tau)];
    return json{{"label", label}, {"display", to_json(display_stats(counts))}};
  };
  json examples = json::array({example("Classifier A", 0.2), example("Classifier B", 0.5),
                               example("Classifier C", 0.8)});
  return {
      {"questionnaire",
       {{"fields",
         json::array({
             {{"key", "age_range"}, {"type", "choice"},
              {"options", {"18-24", "25-34", "35-44", "45-54", "55+"}}},
             {{"key", "ml_expertise"}, {"type", "scale"}, {"min", 1}, {"max", 5}},
             {{"key", "healthcare_expertise"}, {"type", "scale"}, {"min", 1}, {"max", 5}},
         })}}},
      {"task",
       "A screening model looks at measurements from a breast tissue sample and predicts "
       "whether the tumour is malignant (cancer) or benign. Like any model it makes mistakes: "
       "it can miss a cancer (false negative) or raise a false alarm (false positive). Each "
       "chart shows what happens to 100 patients."},
      {"cost_framing",
       "A missed cancer delays treatment. A false alarm leads to further tests, cost, and "
       "worry. Different people weigh these mistakes differently; there is no right answer."},
      {"examples", examples},
      // Placeholder wording: answers are recorded, never scored.
      {"questions",
       json::array({
           {{"id", "comprehension-1"}, {"kind", "comprehension"}, {"example", 0},
            {"prompt", "Out of 100 patients, how many with cancer does Classifier A miss?"}},
           {{"id", "comparison-1"}, {"kind", "comparison"}, {"examples", {0, 2}},
            {"prompt", "Which classifier raises fewer false alarms, A or C?"}},
           {{"id", "simulation-1"}, {"kind", "simulation"}, {"example", 1},
            {"prompt",
             "A new patient has cancer. Using Classifier B, how likely is it that the model "
             "says so?"}},
       })}};
}

// ---------------------------------------------------------------------------

struct SessionService::Entry {
  Entry(SessionRecord r, fs::path p) : record(std::move(r)), log_path(std::move(p)) {}

  std::mutex mutex;
  SessionRecord record;
  fs::path log_path;

  void append(const json& event) {
    if (log_path.empty()) return;
    std::ofstream out(log_path, std::ios::app);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("failed to append to " + log_path.string());
  }
};

SessionService::SessionService(ServiceOptions options,
                               std::map<std::string, std::shared_ptr<const QuerySet>> datasets)
    : options_(std::move(options)), datasets_(std::move(datasets)) {
  if (datasets_.empty()) throw ValidationError("session service needs at least one dataset");
  if (!options_.data_dir.empty()) {
    fs::create_directories(options_.data_dir / "sessions");
    recover();
  }
}

SessionService::~SessionService() = default;

std::int64_t SessionService::now() const {
  if (options_.clock) return options_.clock();
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionService::session_ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

namespace {

std::string random_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

json preference_payload(const PreferenceAck& ack) {
  return {{"status", ack.duplicate ? "duplicate" : "accepted"},
          {"query_id", ack.query_id},
          {"progress", {{"answered", ack.answered}}},
          {"done", ack.phase == SessionPhase::Done}};
}

}  // namespace

json SessionService::create_session(const json& request) {
  SessionConfig config;
  config.dataset_id = request.value("dataset_id", datasets_.begin()->first);
  auto ds = datasets_.find(config.dataset_id);
  if (ds == datasets_.end()) throw NotFound("unknown dataset '" + config.dataset_id + "'");
  config.epsilon = request.value("epsilon", options_.default_epsilon);
  config.eval.n_queries = options_.eval_queries;
  config.eval.min_gap = options_.min_gap;
  json questionnaire = request.value("questionnaire", json::object());

  std::unique_lock lock(map_mutex_);
  std::string id;
  do {
    id = random_session_id();
  } while (sessions_.count(id));
  config.eval.seed = request.contains("eval_seed")
                         ? request.at("eval_seed").get<std::uint64_t>()
                         : splitmix64(options_.base_seed ^ fnv1a(id));
  const auto created = now();

  auto entry = std::make_shared<Entry>(
      SessionRecord(id, created, config, questionnaire, ds->second), fs::path());
  if (!options_.data_dir.empty()) {
    entry->log_path = options_.data_dir / "sessions" / (id + ".jsonl");
    entry->append({{"event", "created"}, {"session_id", id}, {"created_at", created},
                   {"config", to_json(config)}, {"questionnaire", questionnaire}});
    std::ofstream index(options_.data_dir / "index.jsonl", std::ios::app);
    index << json{{"session_id", id}, {"created_at", created}, {"dataset_id", config.dataset_id}}.dump()
          << '\n';
  }
  sessions_.emplace(id, entry);
  return {{"session_id", id},
          {"phase", to_string(SessionPhase::Familiarization)},
          {"config", to_json(config)},
          {"familiarization", familiarization_content(*ds->second)}};
}

json SessionService::complete_familiarization(const std::string& id, const json& answers) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  if (e->record.phase() != SessionPhase::Familiarization)
    throw Rejected("familiarization already completed");
  e->append({{"event", "familiarization"}, {"answers", answers}, {"timestamp_ms", now()}});
  e->record.complete_familiarization(answers);
  return {{"session_id", id}, {"phase", to_string(e->record.phase())}};
}

json SessionService::next_query(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  const auto& r = e->record;
  switch (r.phase()) {
    case SessionPhase::Familiarization:
      return {{"kind", "familiarization"},
              {"session_id", id},
              {"content", familiarization_content(r.elicitation().query_set())}};
    case SessionPhase::Done: {
      auto j = r.result();
      j["kind"] = "result";
      return j;
    }
    default: {
      auto j = public_payload(*r.current_query());
      j["kind"] = "query";
      j["progress"] = {{"answered", r.transcript().size()}};
      return j;
    }
  }
}

json SessionService::post_preference(const std::string& id, const std::string& query_id,
                                     Choice choice, std::int64_t latency_ms) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  if (auto dup = e->record.check_preference(query_id, choice)) return preference_payload(*dup);
  const auto ts = now();
  e->append({{"event", "preference"}, {"query_id", query_id}, {"choice", to_string(choice)},
             {"latency_ms", latency_ms}, {"timestamp_ms", ts}});
  return preference_payload(e->record.apply_preference(query_id, choice, latency_ms, ts));
}

json SessionService::get_result(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  auto j = e->record.result();
  j["session_id"] = id;
  return j;
}

std::string SessionService::transcript(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->record.transcript_jsonl();
}

json SessionService::snapshot(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->record.snapshot();
}

void SessionService::recover() {
  std::ifstream index(options_.data_dir / "index.jsonl");
  std::string line;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::string id;
    try {
      id = json::parse(line).at("session_id").get<std::string>();
    } catch (const json::exception&) {
      warnings_.push_back("index: skipped unreadable line");
      continue;
    }
    const auto path = options_.data_dir / "sessions" / (id + ".jsonl");
    std::ifstream log(path);
    std::vector<std::string> lines;
    for (std::string l; std::getline(log, l);)
      if (!l.empty()) lines.push_back(l);
    if (lines.empty()) {
      warnings_.push_back("session " + id + ": empty event log");
      continue;
    }
    try {
      const auto created = json::parse(lines[0]);
      auto config = session_config_from_json(created.at("config"));
      auto ds = datasets_.find(config.dataset_id);
      if (ds == datasets_.end()) {
        warnings_.push_back("session " + id + ": dataset '" + config.dataset_id + "' not loaded");
        continue;
      }
      auto entry = std::make_shared<Entry>(
          SessionRecord(id, created.at("created_at").get<std::int64_t>(), config,
                        created.value("questionnaire", json::object()), ds->second),
          path);
      for (std::size_t i = 1; i < lines.size(); ++i) {
        json ev;
        try {
          ev = json::parse(lines[i]);
        } catch (const json::parse_error&) {
          // A torn final line is an interrupted append; anything else is corruption.
          // Rewrite without it so later appends start on a clean line.
          if (i + 1 == lines.size()) {
            warnings_.push_back("session " + id + ": dropped torn final event");
            std::ofstream rewrite(path, std::ios::trunc);
            for (std::size_t k = 0; k < i; ++k) rewrite << lines[k] << '\n';
            break;
          }
          throw;
        }
        const auto kind = ev.at("event").get<std::string>();
        if (kind == "familiarization") {
          entry->record.complete_familiarization(ev.at("answers"));
        } else if (kind == "preference") {
          entry->record.apply_preference(ev.at("query_id").get<std::string>(),
                                         choice_from_string(ev.at("choice").get<std::string>()),
                                         ev.at("latency_ms").get<std::int64_t>(),
                                         ev.at("timestamp_ms").get<std::int64_t>());
        } else {
          throw ParseError("unknown event '" + kind + "'", i + 1);
        }
      }
      sessions_.emplace(id, std::move(entry));
    } catch (const std::exception& ex) {
      warnings_.push_back("session " + id + ": " + ex.what());
    }
  }
}

}  // namespace elicit
