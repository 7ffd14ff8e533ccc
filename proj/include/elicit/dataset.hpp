#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace elicit {

struct Record {
  std::vector<double> features;
  int label = 0;  // 0 or 1

  bool operator==(const Record&) const = default;
};

// Labeled feature vectors with a common dimension and both classes present.
class LabeledDataset {
 public:
  // Throws ValidationError if the records are empty, ragged, carry a label
  // other than 0/1, or contain only one class.
  explicit LabeledDataset(std::vector<Record> records);

  const std::vector<Record>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t positives() const noexcept;

 private:
  std::vector<Record> records_;
  std::size_t feature_dim_ = 0;
};

// How to read a raw CSV into a LabeledDataset.
struct CsvFormat {
  std::string label_column = "class";
  std::vector<std::string> drop_columns;
  // Raw label text -> {0,1}. Empty means labels must already read "0"/"1".
  std::map<std::string, int> label_map;
};

struct LoadResult {
  LabeledDataset dataset;
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;  // rows with a "?" or empty cell
};

// Header row required. Missing values ("?" or empty) drop the row.
LoadResult load_dataset(std::istream& source, const CsvFormat& format);

// Uniform shuffle by seed; the first half gets the extra record when the size
// is odd. Reshuffles (bounded) until both halves contain both classes.
struct Split {
  LabeledDataset train;
  LabeledDataset test;
};
Split split(const LabeledDataset& dataset, std::uint64_t seed);

struct FitConfig {
  double step_size = 1.0;
  double l2 = 1e-4;
  std::size_t max_iter = 10000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

FitConfig fit_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitConfig& c);

struct Normalization {
  double shift = 0.0;
  double scale = 1.0;
};

// Logistic regression on standardized features. weights[0] is the intercept.
class Scorer {
 public:
  Scorer(std::vector<double> weights, std::vector<Normalization> normalization);

  std::size_t feature_dim() const noexcept { return normalization_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Normalization>& normalization() const noexcept {
    return normalization_;
  }

  // Always strictly inside (0,1).
  double score(std::span<const double> features) const;

 private:
  std::vector<double> weights_;
  std::vector<Normalization> normalization_;
};

nlohmann::json to_json(const Scorer& s);
Scorer scorer_from_json(const nlohmann::json& j);

struct FitResult {
  Scorer scorer;
  bool converged = false;  // false: max_iter reached before tol
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

// Full-batch gradient descent on the mean log-loss plus (l2/2)|w|^2, the
// intercept unpenalized. Starts from zero weights, so the result depends only
// on (train, config).
FitResult fit_scorer(const LabeledDataset& train, const FitConfig& config);

struct ScoredEntry {
  double score = 0.0;
  int label = 0;

  bool operator==(const ScoredEntry&) const = default;
};

// Scores in [0,1] sorted by descending score. Ties keep input order.
class ScoredDataset {
 public:
  // Sorts the entries. Throws ValidationError on out-of-range scores, bad
  // labels, or a single class.
  explicit ScoredDataset(std::vector<ScoredEntry> entries);

  const std::vector<ScoredEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t positives() const noexcept { return positives_; }
  std::size_t negatives() const noexcept { return size() - positives_; }
  double pi() const noexcept {
    return static_cast<double>(positives_) / static_cast<double>(size());
  }

  // Number of entries with score >= tau, and the positives among them.
  std::size_t count_at_or_above(double tau) const;
  std::size_t positives_in_top(std::size_t k) const { return cum_pos_[k]; }

  bool operator==(const ScoredDataset& o) const { return entries_ == o.entries_; }

 private:
  std::vector<ScoredEntry> entries_;
  std::vector<std::size_t> cum_pos_;  // cum_pos_[k] = positives among top k
  std::size_t positives_ = 0;
};

using ScoreFunction = std::function<double(std::span<const double>)>;

ScoredDataset score_dataset(const LabeledDataset& data, const ScoreFunction& fn);

// Throws ContractViolation on a feature dimension mismatch.
ScoredDataset score_test(const Scorer& scorer, const LabeledDataset& test);

// Two columns `score,label` with a header row.
ScoredDataset load_scored_csv(std::istream& source);
void write_scored_csv(std::ostream& out, const ScoredDataset& scored);

// Probability that a random positive outranks a random negative; ties count
// one half.
double roc_auc(const ScoredDataset& scored);

// Scores uniform on [0,1], label ~ Bernoulli(score): a calibrated scorer over
// a smooth population.
ScoredDataset synthetic_smooth(std::size_t n, std::uint64_t seed);

}  // namespace elicit
