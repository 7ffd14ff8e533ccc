#include "elicit/confusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "elicit/error.hpp"

namespace elicit {

ConfusionVector ConfusionCounts::vector() const noexcept {
  const double n = static_cast<double>(n_total);
  return {static_cast<double>(tp) / n, static_cast<double>(tn) / n,
          static_cast<double>(tp + fn) / n};
}

ConfusionCounts counts_at(const ScoredDataset& scored, double tau) {
  const std::size_t predicted_pos = scored.count_at_or_above(tau);
  ConfusionCounts c;
  c.n_total = scored.size();
  c.tp = scored.positives_in_top(predicted_pos);
  c.fp = predicted_pos - c.tp;
  c.fn = scored.positives() - c.tp;
  c.tn = scored.negatives() - c.fp;
  return c;
}

ConfusionVector confusion_at(const ScoredDataset& scored, double tau) {
  return counts_at(scored, tau).vector();
}

QuerySet::QuerySet(const ScoredDataset& scored, double step) {
  if (!(step > 0.0 && step < 1.0)) throw ValidationError("step must lie in (0,1)");
  const double inv = 1.0 / step;
  intervals_ = static_cast<std::size_t>(std::llround(inv));
  if (std::abs(inv - static_cast<double>(intervals_)) > 1e-6 * inv)
    throw ValidationError("step must divide 1 evenly");

  pi_ = scored.pi();
  n_total_ = scored.size();
  const std::size_t n = intervals_ + 1;
  thresholds_.reserve(n);
  confusions_.reserve(n);
  counts_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(intervals_);
    thresholds_.push_back(tau);
    counts_.push_back(counts_at(scored, tau));
    confusions_.push_back(counts_.back().vector());
  }
  build_plateaus();
}

void QuerySet::build_plateaus() {
  plateaus_.clear();
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (!plateaus_.empty() && plateaus_.back().counts == counts_[i]) {
      plateaus_.back().last = i;
    } else {
      plateaus_.push_back({i, i, confusions_[i], counts_[i]});
    }
  }
}

std::size_t QuerySet::snap(double tau) const noexcept {
  tau = std::clamp(tau, 0.0, 1.0);
  return static_cast<std::size_t>(std::llround(tau * static_cast<double>(intervals_)));
}

nlohmann::json to_json(const ConfusionVector& v) {
  return {{"tp", v.tp}, {"tn", v.tn}, {"fp", v.fp()}, {"fn", v.fn()}, {"pi", v.pi}};
}

nlohmann::json to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"n_total", c.n_total}};
}

ConfusionCounts counts_from_json(const nlohmann::json& j) {
  ConfusionCounts c;
  c.tp = j.at("tp").get<std::size_t>();
  c.tn = j.at("tn").get<std::size_t>();
  c.fp = j.at("fp").get<std::size_t>();
  c.fn = j.at("fn").get<std::size_t>();
  c.n_total = j.at("n_total").get<std::size_t>();
  if (c.tp + c.tn + c.fp + c.fn != c.n_total)
    throw ParseError("confusion counts do not sum to n_total");
  return c;
}

nlohmann::json to_json(const QuerySet& q) {
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json confusions = nlohmann::json::array();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto& c = q.counts_[i];
    counts.push_back({c.tp, c.tn, c.fp, c.fn});
    confusions.push_back({q.confusions_[i].tp, q.confusions_[i].tn});
  }
  return {{"step", q.step()},         {"intervals", q.intervals_},
          {"pi", q.pi_},              {"n_total", q.n_total_},
          {"thresholds", q.thresholds_}, {"confusions", confusions},
          {"counts", counts},         {"distinct_confusions", q.plateaus_.size()}};
}

QuerySet query_set_from_json(const nlohmann::json& j) {
  QuerySet q;
  q.intervals_ = j.at("intervals").get<std::size_t>();
  q.n_total_ = j.at("n_total").get<std::size_t>();
  q.thresholds_ = j.at("thresholds").get<std::vector<double>>();
  const auto& counts = j.at("counts");
  if (q.thresholds_.size() != q.intervals_ + 1 || counts.size() != q.thresholds_.size())
    throw ParseError("query set arrays have inconsistent lengths");
  for (const auto& row : counts) {
    ConfusionCounts c{row.at(0).get<std::size_t>(), row.at(1).get<std::size_t>(),
                      row.at(2).get<std::size_t>(), row.at(3).get<std::size_t>(),
                      q.n_total_};
    if (c.tp + c.tn + c.fp + c.fn != c.n_total)
      throw ParseError("query set counts do not sum to n_total");
    q.counts_.push_back(c);
    q.confusions_.push_back(c.vector());
  }
  q.pi_ = q.confusions_.front().pi;
  for (std::size_t i = 1; i < q.thresholds_.size(); ++i)
    if (!(q.thresholds_[i] > q.thresholds_[i - 1]))
      throw ParseError("query set thresholds must be strictly ascending");
  q.build_plateaus();
  return q;
}

DisplayStats display_stats(const ConfusionCounts& counts) {
  if (counts.n_total == 0 || counts.tp + counts.tn + counts.fp + counts.fn != counts.n_total)
    throw ContractViolation("inconsistent confusion counts");
  const std::size_t n = counts.n_total;
  const std::array<std::size_t, 4> raw = {counts.tp, counts.fn, counts.fp, counts.tn};
  std::array<int, 4> cells{};
  std::array<std::size_t, 4> rem{};
  int assigned = 0;
  for (int k = 0; k < 4; ++k) {
    cells[k] = static_cast<int>(raw[k] * 100 / n);
    rem[k] = raw[k] * 100 % n;
    assigned += cells[k];
  }
  // Hand out the missing units by largest remainder; ties go to the earlier cell.
  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < 100; ++k, ++assigned) cells[order[k]]++;

  DisplayStats d;
  d.tp = cells[0];
  d.fn = cells[1];
  d.fp = cells[2];
  d.tn = cells[3];
  d.actual_positive = d.tp + d.fn;
  d.actual_negative = d.fp + d.tn;
  d.predicted_positive = d.tp + d.fp;
  d.predicted_negative = d.fn + d.tn;
  const auto pos = counts.tp + counts.fn;
  const auto neg = counts.fp + counts.tn;
  d.tpr = pos ? static_cast<double>(counts.tp) / static_cast<double>(pos) : 0.0;
  d.tnr = neg ? static_cast<double>(counts.tn) / static_cast<double>(neg) : 0.0;
  return d;
}

DisplayStats display_stats(const ConfusionVector& v, const ConfusionCounts& counts) {
  const auto from_counts = counts.n_total ? counts.vector() : ConfusionVector{};
  constexpr double kTol = 1e-12;
  if (std::abs(from_counts.tp - v.tp) > kTol || std::abs(from_counts.tn - v.tn) > kTol ||
      std::abs(from_counts.pi - v.pi) > kTol)
    throw ContractViolation("confusion vector does not match its counts");
  return display_stats(counts);
}

nlohmann::json to_json(const DisplayStats& d) {
  return {{"cells", {{"tp", d.tp}, {"fn", d.fn}, {"fp", d.fp}, {"tn", d.tn}}},
          {"totals",
           {{"actual_positive", d.actual_positive},
            {"actual_negative", d.actual_negative},
            {"predicted_positive", d.predicted_positive},
            {"predicted_negative", d.predicted_negative}}},
          {"rates", {{"tpr", d.tpr}, {"tnr", d.tnr}}}};
}

}  // namespace elicit
