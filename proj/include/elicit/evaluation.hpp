#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "elicit/confusion.hpp"
#include "elicit/metric.hpp"
#include "elicit/oracle.hpp"

namespace elicit {

struct EvalConfig {
  std::size_t n_queries = 15;
  double min_gap = 0.05;
  std::uint64_t seed = 0;
};

// n random comparisons between grid thresholds at least min_gap apart whose
// confusion vectors differ. Deterministic given the seed. Throws
// ValidationError when no such pair exists on the grid.
std::vector<Query> generate_eval_queries(const QuerySet& qs, const EvalConfig& config);

struct EvaluationItem {
  Query query;
  Choice oracle_choice = Choice::Left;
  Preference metric_preference = Preference::Tie;
  bool match = false;
};

struct EvaluationReport {
  std::size_t n_queries = 0;
  std::size_t matches = 0;
  double m_value = 0.0;  // matches / n_queries * 100, exact
  std::vector<EvaluationItem> items;

  int m_display() const;  // rounded to the nearest integer
};

// A metric-side tie counts as a match whatever the oracle chose. Throws
// ContractViolation when a query has no response.
EvaluationReport compute_m(const LinearMetric& metric, std::span<const Query> queries,
                           std::span<const OracleResponse> responses);

nlohmann::json to_json(const EvaluationReport& r);

}  // namespace elicit
