#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "elicit/confusion.hpp"
#include "elicit/error.hpp"
#include "elicit/metric.hpp"

namespace elicit {

enum class Choice { Left, Right };
enum class Phase { Elicitation, Evaluation };

const char* to_string(Choice c) noexcept;
const char* to_string(Phase p) noexcept;
Choice choice_from_string(std::string_view s);  // "left" / "right"
Phase phase_from_string(std::string_view s);

// One classifier shown in a comparison.
struct QuerySide {
  double threshold = 0.0;  // grid threshold the confusion was read at
  ConfusionVector confusion;
  ConfusionCounts counts;
  DisplayStats display;

  bool operator==(const QuerySide&) const = default;
};

QuerySide make_side(const QuerySet& qs, std::size_t grid_index);

struct Query {
  std::string query_id;
  QuerySide left;
  QuerySide right;
  Phase phase = Phase::Elicitation;

  bool operator==(const Query&) const = default;
};

struct OracleResponse {
  std::string query_id;
  Choice choice = Choice::Left;
  std::int64_t latency_ms = 0;

  bool operator==(const OracleResponse&) const = default;
};

// Full record including thresholds, for transcripts.
nlohmann::json to_json(const QuerySide& s);
nlohmann::json to_json(const Query& q);
// What a subject sees: display statistics only, no thresholds, no phase.
nlohmann::json public_payload(const Query& q);

// Answers pairwise comparisons. Instances belong to one session or run.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleResponse answer(const Query& q) = 0;
};

// Prefers the side with the higher metric value; exact ties answer Right.
class LinearOracle final : public Oracle {
 public:
  explicit LinearOracle(LinearMetric metric) : metric_(metric) {}
  OracleResponse answer(const Query& q) override;
  const LinearMetric& metric() const noexcept { return metric_; }

 private:
  LinearMetric metric_;
};

// Flips the base oracle's answer with probability flip_p. Whether a query is
// flipped depends only on (seed, query_id).
class NoisyOracle final : public Oracle {
 public:
  // Throws ValidationError unless 0 <= flip_p < 0.5.
  NoisyOracle(std::unique_ptr<Oracle> base, double flip_p, std::uint64_t seed);
  OracleResponse answer(const Query& q) override;
  bool flips(std::string_view query_id) const noexcept;

 private:
  std::unique_ptr<Oracle> base_;
  double flip_p_;
  std::uint64_t seed_;
};

class ScriptExhausted : public Error {
 public:
  using Error::Error;
};

// Replays a fixed list of choices in order.
class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(std::vector<Choice> script) : script_(std::move(script)) {}
  OracleResponse answer(const Query& q) override;
  std::size_t consumed() const noexcept { return next_; }

 private:
  std::vector<Choice> script_;
  std::size_t next_ = 0;
};

}  // namespace elicit
