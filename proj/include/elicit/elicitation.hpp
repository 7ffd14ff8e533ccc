#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "elicit/confusion.hpp"
#include "elicit/metric.hpp"
#include "elicit/oracle.hpp"

namespace elicit {

// Binary-search interval over thresholds, 0 <= tau_a < tau_b <= 1.
struct Interval {
  double tau_a = 0.0;
  double tau_b = 1.0;

  double width() const noexcept { return tau_b - tau_a; }
  bool operator==(const Interval&) const = default;
};

// The five quarter points of an interval: a, c, d, e, b.
std::array<double, 5> quarter_points(const Interval& iv) noexcept;

// Responses are the choices for the four comparisons of a batch, in order:
//   (c vs a), (d vs c), (e vs d), (b vs e)
// where Left means the first-named, higher-threshold point won. Returns the
// rule that fires, 1..5:
//   1: a beats c              -> [a, d]
//   2: c beats a and d        -> [a, d]
//   3: d beats c and e        -> [c, e]
//   4: e beats d and b        -> [d, b]
//   5: otherwise              -> [d, b]
// Throws ContractViolation unless exactly four responses are given.
int shrink_case(std::span<const Choice> responses);
Interval shrink_interval(std::span<const Choice> responses, const Interval& iv);

// The four comparisons of one iteration, thresholds snapped to the grid.
struct QueryBatch {
  std::array<double, 5> points{};  // exact a, c, d, e, b before snapping
  std::array<Query, 4> queries;
};

enum class ElicitationStatus { AwaitingResponses, Converged };

struct IterationRecord {
  Interval before;
  std::array<Choice, 4> responses{};
  int shrink_case = 0;
  Interval after;
};

enum class SubmitOutcome { Accepted, Duplicate };

// Resumable form of the quarter-point binary search. Feed it one response at
// a time; it advances to the next batch once all four answers are in and
// converges when the interval width drops to epsilon or below. Mutations must
// be serialized by the owner.
class ElicitationState {
 public:
  // Throws ValidationError unless 0 < epsilon < 1.
  static ElicitationState start(std::shared_ptr<const QuerySet> query_set, double epsilon);

  const Interval& interval() const noexcept { return interval_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t iteration() const noexcept { return history_.size(); }
  ElicitationStatus status() const noexcept { return status_; }
  bool converged() const noexcept { return status_ == ElicitationStatus::Converged; }
  const std::optional<LinearMetric>& result() const noexcept { return result_; }
  const std::optional<QueryBatch>& pending() const noexcept { return pending_; }
  const std::array<std::optional<Choice>, 4>& collected() const noexcept { return collected_; }
  const std::vector<IterationRecord>& history() const noexcept { return history_; }
  const QuerySet& query_set() const noexcept { return *query_set_; }

  // First unanswered query of the pending batch; nullptr once converged.
  const Query* next_query() const noexcept;
  std::vector<Query> unanswered() const;

  // Rejected if the id is not in the pending batch, or repeats an answered
  // query with a different choice. An identical repeat is a no-op.
  SubmitOutcome submit(const OracleResponse& r);

  // Complete snapshot; two states are identical iff their dumps are.
  nlohmann::json to_json() const;

 private:
  ElicitationState() = default;
  void materialize_batch();

  std::shared_ptr<const QuerySet> query_set_;
  Interval interval_;
  double epsilon_ = 0.05;
  std::optional<QueryBatch> pending_;
  std::array<std::optional<Choice>, 4> collected_{};
  std::vector<IterationRecord> history_;
  ElicitationStatus status_ = ElicitationStatus::AwaitingResponses;
  std::optional<LinearMetric> result_;
};

ElicitationState submit_response(ElicitationState state, const OracleResponse& r);

using Clock = std::function<std::int64_t()>;  // milliseconds

struct TranscriptEntry {
  Query query;
  OracleResponse response;
  std::int64_t timestamp_ms = 0;

  bool operator==(const TranscriptEntry&) const = default;
};

nlohmann::json to_json(const TranscriptEntry& e);
// One JSON object per line.
std::string transcript_jsonl(std::span<const TranscriptEntry> entries);

struct ElicitationRun {
  LinearMetric metric;
  std::vector<TranscriptEntry> transcript;
  ElicitationState state;
};

// Drives a synchronous oracle until convergence. Without a clock every
// timestamp is 0.
ElicitationRun run_to_completion(Oracle& oracle, std::shared_ptr<const QuerySet> query_set,
                                 double epsilon, const Clock& clock = {});

}  // namespace elicit
