#include "elicit/evaluation.hpp"

#include <cmath>
#include <map>

#include "elicit/error.hpp"
#include "elicit/random.hpp"

namespace elicit {

std::vector<Query> generate_eval_queries(const QuerySet& qs, const EvalConfig& config) {
  if (config.n_queries == 0) throw ValidationError("need at least one evaluation query");
  if (!(config.min_gap >= 0.0)) throw ValidationError("min_gap must be nonnegative");

  // Feasible iff two plateaus are separated by at least min_gap on the grid.
  const auto& plateaus = qs.plateaus();
  const auto& tau = qs.thresholds();
  bool feasible = false;
  for (std::size_t i = 0; i < plateaus.size() && !feasible; ++i)
    for (std::size_t j = i + 1; j < plateaus.size() && !feasible; ++j)
      feasible = tau[plateaus[j].last] - tau[plateaus[i].first] >= config.min_gap;
  if (!feasible)
    throw ValidationError("no threshold pair satisfies the gap and distinct-confusion constraints");

  Rng rng(config.seed);
  const std::uint64_t n = qs.size();
  constexpr std::size_t kMaxDrawsPerQuery = 1'000'000;
  std::vector<Query> out;
  out.reserve(config.n_queries);
  for (std::size_t k = 0; k < config.n_queries; ++k) {
    std::size_t draws = 0;
    for (;;) {
      if (++draws > kMaxDrawsPerQuery)
        throw ValidationError("could not sample an evaluation pair within the draw budget");
      const auto i = static_cast<std::size_t>(uniform_index(rng, n));
      const auto j = static_cast<std::size_t>(uniform_index(rng, n));
      if (std::abs(tau[i] - tau[j]) < config.min_gap) continue;
      if (qs.confusions()[i] == qs.confusions()[j]) continue;
      Query q;
      q.query_id = "eval-" + std::to_string(k + 1);
      q.phase = Phase::Evaluation;
      q.left = make_side(qs, i);
      q.right = make_side(qs, j);
      out.push_back(std::move(q));
      break;
    }
  }
  return out;
}

int EvaluationReport::m_display() const { return static_cast<int>(std::lround(m_value)); }

EvaluationReport compute_m(const LinearMetric& metric, std::span<const Query> queries,
                           std::span<const OracleResponse> responses) {
  std::map<std::string, Choice> by_id;
  for (const auto& r : responses) by_id[r.query_id] = r.choice;

  EvaluationReport report;
  report.n_queries = queries.size();
  for (const auto& q : queries) {
    auto it = by_id.find(q.query_id);
    if (it == by_id.end()) throw ContractViolation("no response for query '" + q.query_id + "'");
    EvaluationItem item{q, it->second, prefer(metric, q.left.confusion, q.right.confusion), false};
    item.match = item.metric_preference == Preference::Tie ||
                 (item.metric_preference == Preference::Left) == (item.oracle_choice == Choice::Left);
    report.matches += item.match;
    report.items.push_back(std::move(item));
  }
  report.m_value = report.n_queries
                       ? static_cast<double>(report.matches) / static_cast<double>(report.n_queries) * 100.0
                       : 0.0;
  return report;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : r.items)
    items.push_back({{"query", to_json(it.query)},
                     {"oracle_choice", to_string(it.oracle_choice)},
                     {"metric_preference", to_string(it.metric_preference)},
                     {"match", it.match}});
  return {{"n_queries", r.n_queries}, {"matches", r.matches}, {"m_value", r.m_value},
          {"m_display", r.m_display()}, {"items", items}};
}

}  // namespace elicit
