#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include "elicit/dataset.hpp"

namespace elicit {

// Confusion statistics as probability mass: TP and TN plus the base rate pi.
// FN and FP are implied, clamped at zero against rounding in the subtraction.
struct ConfusionVector {
  double tp = 0.0;
  double tn = 0.0;
  double pi = 0.5;

  double fn() const noexcept { return std::max(0.0, pi - tp); }
  double fp() const noexcept { return std::max(0.0, 1.0 - pi - tn); }

  bool operator==(const ConfusionVector&) const = default;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t n_total = 0;

  ConfusionVector vector() const noexcept;
  bool operator==(const ConfusionCounts&) const = default;
};

// Thresholded classifier h(x) = 1[score >= tau]. Scores equal to tau are
// predicted positive.
ConfusionCounts counts_at(const ScoredDataset& scored, double tau);
ConfusionVector confusion_at(const ScoredDataset& scored, double tau);

// A maximal run of consecutive grid thresholds sharing one confusion vector.
struct Plateau {
  std::size_t first = 0;  // grid indices, inclusive
  std::size_t last = 0;
  ConfusionVector confusion;
  ConfusionCounts counts;

  bool operator==(const Plateau&) const = default;
};

// Confusion vectors over the grid {0, step, ..., 1}. The grid point i is
// i / N with N = 1/step, so grids of step s and s/2 share bit-identical
// thresholds.
class QuerySet {
 public:
  // Throws ValidationError unless 0 < step < 1 and 1/step is an integer.
  QuerySet(const ScoredDataset& scored, double step);

  std::size_t size() const noexcept { return thresholds_.size(); }
  double step() const noexcept { return 1.0 / static_cast<double>(intervals_); }
  std::size_t intervals() const noexcept { return intervals_; }
  double pi() const noexcept { return pi_; }
  std::size_t n_total() const noexcept { return n_total_; }

  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::vector<ConfusionVector>& confusions() const noexcept { return confusions_; }
  const std::vector<ConfusionCounts>& counts() const noexcept { return counts_; }
  const std::vector<Plateau>& plateaus() const noexcept { return plateaus_; }

  // Index of the grid threshold nearest to tau (tau clamped to [0,1]).
  std::size_t snap(double tau) const noexcept;

  bool operator==(const QuerySet&) const = default;

  friend nlohmann::json to_json(const QuerySet& q);
  friend QuerySet query_set_from_json(const nlohmann::json& j);

 private:
  QuerySet() = default;
  void build_plateaus();

  std::size_t intervals_ = 0;
  double pi_ = 0.0;
  std::size_t n_total_ = 0;
  std::vector<double> thresholds_;
  std::vector<ConfusionVector> confusions_;
  std::vector<ConfusionCounts> counts_;
  std::vector<Plateau> plateaus_;
};

inline QuerySet build_query_set(const ScoredDataset& scored, double step) {
  return QuerySet(scored, step);
}

nlohmann::json to_json(const QuerySet& q);
QuerySet query_set_from_json(const nlohmann::json& j);

// Out-of-100 view of a confusion matrix for display.
struct DisplayStats {
  int tp = 0;
  int fn = 0;
  int fp = 0;
  int tn = 0;
  int actual_positive = 0;
  int actual_negative = 0;
  int predicted_positive = 0;
  int predicted_negative = 0;
  // Rates conditioned on the true class, from the exact counts.
  double tpr = 0.0;
  double tnr = 0.0;

  bool operator==(const DisplayStats&) const = default;
};

// Largest-remainder rounding so the four cells sum to exactly 100. Totals are
// sums of the rounded cells. Throws ContractViolation if counts and v disagree.
DisplayStats display_stats(const ConfusionVector& v, const ConfusionCounts& counts);
DisplayStats display_stats(const ConfusionCounts& counts);

nlohmann::json to_json(const ConfusionVector& v);
nlohmann::json to_json(const ConfusionCounts& c);
nlohmann::json to_json(const DisplayStats& d);
ConfusionCounts counts_from_json(const nlohmann::json& j);

}  // namespace elicit
