#include "elicit/elicitation.hpp"

#include <sstream>

#include "elicit/error.hpp"

namespace elicit {

std::array<double, 5> quarter_points(const Interval& iv) noexcept {
  const double a = iv.tau_a, b = iv.tau_b;
  return {a, (3 * a + b) / 4, (a + b) / 2, (a + 3 * b) / 4, b};
}

int shrink_case(std::span<const Choice> r) {
  if (r.size() != 4)
    throw ContractViolation("shrink needs exactly 4 responses, got " + std::to_string(r.size()));
  const bool c_over_a = r[0] == Choice::Left;
  const bool d_over_c = r[1] == Choice::Left;
  const bool e_over_d = r[2] == Choice::Left;
  const bool b_over_e = r[3] == Choice::Left;
  if (!c_over_a) return 1;
  if (c_over_a && !d_over_c) return 2;
  if (d_over_c && !e_over_d) return 3;
  if (e_over_d && !b_over_e) return 4;
  return 5;
}

Interval shrink_interval(std::span<const Choice> responses, const Interval& iv) {
  const auto [a, c, d, e, b] = quarter_points(iv);
  switch (shrink_case(responses)) {
    case 1:
    case 2: return {a, d};
    case 3: return {c, e};
    default: return {d, b};
  }
}

ElicitationState ElicitationState::start(std::shared_ptr<const QuerySet> query_set,
                                         double epsilon) {
  if (!query_set) throw ValidationError("elicitation needs a query set");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("epsilon must lie in (0,1), got " + std::to_string(epsilon));
  ElicitationState s;
  s.query_set_ = std::move(query_set);
  s.epsilon_ = epsilon;
  s.materialize_batch();
  return s;
}

void ElicitationState::materialize_batch() {
  QueryBatch batch;
  batch.points = quarter_points(interval_);
  const auto& qs = *query_set_;
  const std::size_t iter = history_.size() + 1;
  for (std::size_t k = 0; k < 4; ++k) {
    Query& q = batch.queries[k];
    q.query_id = "elicit-" + std::to_string(iter) + "-" + std::to_string(k + 1);
    q.phase = Phase::Elicitation;
    q.left = make_side(qs, qs.snap(batch.points[k + 1]));
    q.right = make_side(qs, qs.snap(batch.points[k]));
  }
  pending_ = std::move(batch);
  collected_ = {};
}

const Query* ElicitationState::next_query() const noexcept {
  if (!pending_) return nullptr;
  for (std::size_t k = 0; k < 4; ++k)
    if (!collected_[k]) return &pending_->queries[k];
  return nullptr;
}

std::vector<Query> ElicitationState::unanswered() const {
  std::vector<Query> out;
  if (!pending_) return out;
  for (std::size_t k = 0; k < 4; ++k)
    if (!collected_[k]) out.push_back(pending_->queries[k]);
  return out;
}

SubmitOutcome ElicitationState::submit(const OracleResponse& r) {
  if (!pending_) throw Rejected("elicitation has converged; no query is pending");
  std::size_t k = 0;
  while (k < 4 && pending_->queries[k].query_id != r.query_id) ++k;
  if (k == 4) throw Rejected("query '" + r.query_id + "' is not pending");
  if (collected_[k]) {
    if (*collected_[k] == r.choice) return SubmitOutcome::Duplicate;
    throw Rejected("query '" + r.query_id + "' was already answered differently");
  }
  collected_[k] = r.choice;
  for (const auto& c : collected_)
    if (!c) return SubmitOutcome::Accepted;

  IterationRecord rec;
  rec.before = interval_;
  for (std::size_t i = 0; i < 4; ++i) rec.responses[i] = *collected_[i];
  rec.shrink_case = shrink_case(rec.responses);
  interval_ = shrink_interval(rec.responses, interval_);
  rec.after = interval_;
  history_.push_back(rec);

  if (interval_.width() <= epsilon_) {
    status_ = ElicitationStatus::Converged;
    result_ = metric_from_threshold((interval_.tau_a + interval_.tau_b) / 2);
    pending_.reset();
    collected_ = {};
  } else {
    materialize_batch();
  }
  return SubmitOutcome::Accepted;
}

namespace {

nlohmann::json interval_json(const Interval& iv) { return {iv.tau_a, iv.tau_b}; }

}  // namespace

nlohmann::json ElicitationState::to_json() const {
  nlohmann::json j;
  j["interval"] = interval_json(interval_);
  j["epsilon"] = epsilon_;
  j["iteration"] = history_.size();
  j["status"] = converged() ? "converged" : "awaiting_responses";
  j["result"] = result_ ? elicit::to_json(*result_) : nlohmann::json(nullptr);
  if (pending_) {
    nlohmann::json p;
    p["points"] = pending_->points;
    for (std::size_t k = 0; k < 4; ++k) {
      auto q = elicit::to_json(pending_->queries[k]);
      q["response"] = collected_[k] ? nlohmann::json(to_string(*collected_[k])) : nlohmann::json(nullptr);
      p["queries"].push_back(std::move(q));
    }
    j["pending"] = std::move(p);
  } else {
    j["pending"] = nullptr;
  }
  j["history"] = nlohmann::json::array();
  for (const auto& h : history_) {
    nlohmann::json rs = nlohmann::json::array();
    for (auto c : h.responses) rs.push_back(to_string(c));
    j["history"].push_back({{"before", interval_json(h.before)},
                            {"responses", rs},
                            {"case", h.shrink_case},
                            {"after", interval_json(h.after)}});
  }
  return j;
}

ElicitationState submit_response(ElicitationState state, const OracleResponse& r) {
  state.submit(r);
  return state;
}

nlohmann::json to_json(const TranscriptEntry& e) {
  auto j = to_json(e.query);
  j["choice"] = to_string(e.response.choice);
  j["latency_ms"] = e.response.latency_ms;
  j["timestamp_ms"] = e.timestamp_ms;
  return j;
}

std::string transcript_jsonl(std::span<const TranscriptEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

ElicitationRun run_to_completion(Oracle& oracle, std::shared_ptr<const QuerySet> query_set,
                                 double epsilon, const Clock& clock) {
  auto state = ElicitationState::start(std::move(query_set), epsilon);
  std::vector<TranscriptEntry> transcript;
  while (const Query* q = state.next_query()) {
    Query query = *q;
    auto response = oracle.answer(query);
    response.query_id = query.query_id;
    state.submit(response);
    transcript.push_back({std::move(query), std::move(response), clock ? clock() : 0});
  }
  return {*state.result(), std::move(transcript), std::move(state)};
}

}  // namespace elicit
