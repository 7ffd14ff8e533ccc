#include "elicit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "elicit/error.hpp"
#include "elicit/random.hpp"

namespace elicit {

LabeledDataset::LabeledDataset(std::vector<Record> records)
    : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("dataset has no records");
  feature_dim_ = records_.front().features.size();
  if (feature_dim_ == 0) throw ValidationError("dataset has no features");
  bool seen[2] = {false, false};
  for (const auto& r : records_) {
    if (r.features.size() != feature_dim_)
      throw ValidationError("records have differing feature dimensions");
    if (r.label != 0 && r.label != 1)
      throw ValidationError("label must be 0 or 1, got " + std::to_string(r.label));
    seen[r.label] = true;
  }
  if (!seen[0] || !seen[1])
    throw ValidationError("dataset must contain both classes");
}

std::size_t LabeledDataset::positives() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [](const Record& r) { return r.label == 1; }));
}

namespace {

bool is_missing(std::string_view cell) { return cell.empty() || cell == "?"; }

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

LoadResult load_dataset(std::istream& source, const CsvFormat& format) {
  csv::Reader reader(source);
  auto header = reader.next();
  if (!header) throw ParseError("empty CSV: header row required", 1);

  const auto& cols = *header;
  auto label_it = std::find(cols.begin(), cols.end(), format.label_column);
  if (label_it == cols.end())
    throw ValidationError("label column '" + format.label_column +
                          "' not found; available columns: " + join(cols));
  const auto label_idx = static_cast<std::size_t>(label_it - cols.begin());

  std::vector<std::size_t> feature_idx;
  std::vector<std::string> feature_names;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i == label_idx) continue;
    if (std::find(format.drop_columns.begin(), format.drop_columns.end(), cols[i]) !=
        format.drop_columns.end())
      continue;
    feature_idx.push_back(i);
    feature_names.push_back(cols[i]);
  }

  std::vector<Record> records;
  std::size_t dropped = 0;
  while (auto row = reader.next()) {
    const std::size_t line = reader.row();
    if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
    if (row->size() != cols.size())
      throw ParseError("expected " + std::to_string(cols.size()) + " fields, got " +
                           std::to_string(row->size()),
                       line);
    bool missing = is_missing((*row)[label_idx]);
    for (auto i : feature_idx) missing = missing || is_missing((*row)[i]);
    if (missing) {
      ++dropped;
      continue;
    }

    Record rec;
    rec.features.reserve(feature_idx.size());
    for (auto i : feature_idx) {
      auto v = csv::parse_double((*row)[i]);
      if (!v) throw ParseError("non-numeric value '" + (*row)[i] + "' in column " + cols[i], line);
      rec.features.push_back(*v);
    }
    const std::string& raw = (*row)[label_idx];
    if (format.label_map.empty()) {
      if (raw == "0" || raw == "1") {
        rec.label = raw == "1";
      } else {
        throw ParseError("label '" + raw + "' is not 0/1 and no label map given", line);
      }
    } else {
      auto it = format.label_map.find(raw);
      if (it == format.label_map.end())
        throw ParseError("label '" + raw + "' not in label map", line);
      rec.label = it->second;
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ValidationError("no usable rows after dropping missing values");
  return LoadResult{LabeledDataset(std::move(records)), std::move(feature_names), dropped};
}

Split split(const LabeledDataset& dataset, std::uint64_t seed) {
  const auto& recs = dataset.records();
  const std::size_t n = recs.size();
  if (n < 4) throw ValidationError("split needs at least 4 records");
  const std::size_t n_train = (n + 1) / 2;

  constexpr int kMaxAttempts = 64;
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(order[i], order[uniform_index(rng, i + 1)]);

    auto has_both = [&](std::size_t lo, std::size_t hi) {
      bool seen[2] = {false, false};
      for (std::size_t i = lo; i < hi; ++i) seen[recs[order[i]].label] = true;
      return seen[0] && seen[1];
    };
    if (!has_both(0, n_train) || !has_both(n_train, n)) continue;

    std::vector<Record> train, test;
    train.reserve(n_train);
    test.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i)
      (i < n_train ? train : test).push_back(recs[order[i]]);
    return Split{LabeledDataset(std::move(train)), LabeledDataset(std::move(test))};
  }
  throw ValidationError("could not split into two halves containing both classes");
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  FitConfig c;
  c.step_size = j.value("step_size", c.step_size);
  c.l2 = j.value("l2", c.l2);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.tol = j.value("tol", c.tol);
  c.seed = j.value("seed", c.seed);
  if (!(c.step_size > 0)) throw ValidationError("step_size must be positive");
  if (c.l2 < 0) throw ValidationError("l2 must be nonnegative");
  if (!(c.tol > 0)) throw ValidationError("tol must be positive");
  return c;
}

nlohmann::json to_json(const FitConfig& c) {
  return {{"step_size", c.step_size}, {"l2", c.l2}, {"max_iter", c.max_iter},
          {"tol", c.tol}, {"seed", c.seed}};
}

Scorer::Scorer(std::vector<double> weights, std::vector<Normalization> normalization)
    : weights_(std::move(weights)), normalization_(std::move(normalization)) {
  if (weights_.size() != normalization_.size() + 1)
    throw ValidationError("scorer needs feature_dim + 1 weights");
  for (const auto& n : normalization_)
    if (!(n.scale > 0)) throw ValidationError("normalization scale must be positive");
}

namespace {

// Clamped so the result stays strictly inside (0,1) in double precision.
double sigmoid(double z) {
  z = std::clamp(z, -35.0, 35.0);
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

double Scorer::score(std::span<const double> features) const {
  if (features.size() != feature_dim())
    throw ContractViolation("feature dimension mismatch: scorer expects " +
                            std::to_string(feature_dim()) + ", got " +
                            std::to_string(features.size()));
  double z = weights_[0];
  for (std::size_t i = 0; i < features.size(); ++i)
    z += weights_[i + 1] * (features[i] - normalization_[i].shift) / normalization_[i].scale;
  return sigmoid(z);
}

nlohmann::json to_json(const Scorer& s) {
  nlohmann::json norm = nlohmann::json::array();
  for (const auto& n : s.normalization()) norm.push_back({{"shift", n.shift}, {"scale", n.scale}});
  return {{"weights", s.weights()}, {"normalization", norm}};
}

Scorer scorer_from_json(const nlohmann::json& j) {
  std::vector<Normalization> norm;
  for (const auto& n : j.at("normalization"))
    norm.push_back({n.at("shift").get<double>(), n.at("scale").get<double>()});
  return Scorer(j.at("weights").get<std::vector<double>>(), std::move(norm));
}

FitResult fit_scorer(const LabeledDataset& train, const FitConfig& config) {
  const std::size_t d = train.feature_dim();
  const std::size_t n = train.size();
  const auto& recs = train.records();

  std::vector<Normalization> norm(d);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& r : recs) mean += r.features[k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : recs) var += (r.features[k] - mean) * (r.features[k] - mean);
    var /= static_cast<double>(n);
    norm[k].shift = mean;
    norm[k].scale = var > 0.0 ? std::sqrt(var) : 1.0;  // constant feature -> 0
  }

  // Design matrix with a leading 1 column for the intercept.
  std::vector<std::vector<double>> x(n, std::vector<double>(d + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      x[i][k + 1] = (recs[i].features[k] - norm[k].shift) / norm[k].scale;

  std::vector<double> w(d + 1, 0.0), grad(d + 1);
  FitResult out{Scorer(w, norm)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0;; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0.0;
      for (std::size_t k = 0; k <= d; ++k) z += w[k] * x[i][k];
      const double residual = sigmoid(z) - recs[i].label;
      for (std::size_t k = 0; k <= d; ++k) grad[k] += residual * x[i][k];
    }
    double norm2 = 0.0;
    for (std::size_t k = 0; k <= d; ++k) {
      grad[k] = grad[k] * inv_n + (k == 0 ? 0.0 : config.l2 * w[k]);
      norm2 += grad[k] * grad[k];
    }
    out.gradient_norm = std::sqrt(norm2);
    out.iterations = it;
    if (out.gradient_norm <= config.tol) {
      out.converged = true;
      break;
    }
    if (it == config.max_iter) break;
    for (std::size_t k = 0; k <= d; ++k) w[k] -= config.step_size * grad[k];
  }
  out.scorer = Scorer(std::move(w), std::move(norm));
  return out;
}

ScoredDataset::ScoredDataset(std::vector<ScoredEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("scored dataset is empty");
  for (const auto& e : entries_) {
    if (!(e.score >= 0.0 && e.score <= 1.0))
      throw ValidationError("score outside [0,1]: " + std::to_string(e.score));
    if (e.label != 0 && e.label != 1) throw ValidationError("label must be 0 or 1");
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const ScoredEntry& a, const ScoredEntry& b) { return a.score > b.score; });
  cum_pos_.assign(entries_.size() + 1, 0);
  for (std::size_t i = 0; i < entries_.size(); ++i)
    cum_pos_[i + 1] = cum_pos_[i] + static_cast<std::size_t>(entries_[i].label);
  positives_ = cum_pos_.back();
  if (positives_ == 0 || positives_ == entries_.size())
    throw ValidationError("scored dataset must contain both classes");
}

std::size_t ScoredDataset::count_at_or_above(double tau) const {
  // entries_ is sorted descending: find the first score < tau.
  auto it = std::partition_point(entries_.begin(), entries_.end(),
                                 [tau](const ScoredEntry& e) { return e.score >= tau; });
  return static_cast<std::size_t>(it - entries_.begin());
}

ScoredDataset score_dataset(const LabeledDataset& data, const ScoreFunction& fn) {
  std::vector<ScoredEntry> entries;
  entries.reserve(data.size());
  for (const auto& r : data.records()) entries.push_back({fn(r.features), r.label});
  return ScoredDataset(std::move(entries));
}

ScoredDataset score_test(const Scorer& scorer, const LabeledDataset& test) {
  if (test.feature_dim() != scorer.feature_dim())
    throw ContractViolation("test feature_dim " + std::to_string(test.feature_dim()) +
                            " does not match scorer " + std::to_string(scorer.feature_dim()));
  return score_dataset(test, [&](std::span<const double> x) { return scorer.score(x); });
}

ScoredDataset load_scored_csv(std::istream& source) {
  csv::Reader reader(source);
  auto header = reader.next();
  if (!header) throw ParseError("empty CSV: header row required", 1);
  const auto& cols = *header;
  auto find = [&](const char* name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end())
      throw ValidationError(std::string("pre-scored CSV needs column '") + name +
                            "'; available columns: " + join(cols));
    return static_cast<std::size_t>(it - cols.begin());
  };
  const auto score_idx = find("score");
  const auto label_idx = find("label");

  std::vector<ScoredEntry> entries;
  while (auto row = reader.next()) {
    const std::size_t line = reader.row();
    if (row->size() == 1 && (*row)[0].empty()) continue;
    if (row->size() != cols.size())
      throw ParseError("expected " + std::to_string(cols.size()) + " fields", line);
    auto score = csv::parse_double((*row)[score_idx]);
    if (!score) throw ParseError("non-numeric score '" + (*row)[score_idx] + "'", line);
    const auto& label = (*row)[label_idx];
    if (label != "0" && label != "1") throw ParseError("label must be 0 or 1", line);
    entries.push_back({*score, label == "1"});
  }
  return ScoredDataset(std::move(entries));
}

void write_scored_csv(std::ostream& out, const ScoredDataset& scored) {
  out << "score,label\n";
  char buf[64];
  for (const auto& e : scored.entries()) {
    auto res = std::to_chars(buf, buf + sizeof buf, e.score);
    out.write(buf, res.ptr - buf);
    out << ',' << e.label << '\n';
  }
}

double roc_auc(const ScoredDataset& scored) {
  // Walk groups of equal score from the top; each negative is outranked by the
  // positives above its group and ties half with positives inside it.
  const auto& es = scored.entries();
  double wins = 0.0;
  std::size_t pos_above = 0;
  for (std::size_t i = 0; i < es.size();) {
    std::size_t j = i, pos = 0, neg = 0;
    for (; j < es.size() && es[j].score == es[i].score; ++j) (es[j].label ? pos : neg)++;
    wins += static_cast<double>(neg) * (static_cast<double>(pos_above) + 0.5 * static_cast<double>(pos));
    pos_above += pos;
    i = j;
  }
  return wins / (static_cast<double>(scored.positives()) * static_cast<double>(scored.negatives()));
}

ScoredDataset synthetic_smooth(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = uniform01(rng);
    entries.push_back({s, uniform01(rng) < s ? 1 : 0});
  }
  return ScoredDataset(std::move(entries));
}

}  // namespace elicit
