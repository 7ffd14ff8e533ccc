#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "elicit/elicitation.hpp"
#include "elicit/evaluation.hpp"

namespace elicit {

// One complete in-process session: elicitation, then evaluation queries
// answered by the same oracle.
struct SessionRun {
  LinearMetric metric;
  EvaluationReport report;
  std::vector<TranscriptEntry> transcript;  // elicitation then evaluation
  std::size_t elicitation_queries = 0;
};

SessionRun run_session(Oracle& oracle, std::shared_ptr<const QuerySet> query_set, double epsilon,
                       const EvalConfig& eval, const Clock& clock = {});

struct SimulationConfig {
  std::vector<double> true_a0s;
  std::vector<double> noises = {0.0};
  std::size_t repeats = 1;
  double epsilon = 0.05;
  std::size_t eval_queries = 15;
  double min_gap = 0.05;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct SimulationRow {
  double true_a0 = 0.0;
  double noise = 0.0;
  std::size_t repeat = 0;
  double elicited_a0 = 0.0;
  double abs_error = 0.0;
  std::size_t queries = 0;
  double m_value = 0.0;
  int m_display = 0;
};

// Rows ordered by (true_a0, noise, repeat) whatever the thread count; each
// run's seeds derive from that key, so output is reproducible.
std::vector<SimulationRow> simulate(std::shared_ptr<const QuerySet> query_set,
                                    const SimulationConfig& config);

void write_csv(std::ostream& out, const std::vector<SimulationRow>& rows);
void write_table(std::ostream& out, const std::vector<SimulationRow>& rows);

}  // namespace elicit
