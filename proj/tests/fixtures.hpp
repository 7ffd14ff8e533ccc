#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <vector>

#include "elicit/confusion.hpp"
#include "elicit/dataset.hpp"
#include "oracles.hpp"

namespace fixtures {

// Calibrated population on a lattice: K score levels (i + 0.5)/K with 2K
// copies each, of which (2i + 1) are positive. The positive fraction at each
// level equals its score exactly.
inline elicit::ScoredDataset population(int K = 200) {
  std::vector<elicit::ScoredEntry> es;
  for (int i = 0; i < K; ++i) {
    const double s = (i + 0.5) / K;
    for (int j = 0; j < 2 * K; ++j) es.push_back({s, j < 2 * i + 1 ? 1 : 0});
  }
  return elicit::ScoredDataset(std::move(es));
}

inline std::vector<oracle_ref::Sample> samples(const elicit::ScoredDataset& s) {
  std::vector<oracle_ref::Sample> out;
  for (const auto& e : s.entries()) out.push_back({e.score, e.label});
  return out;
}

// n * value of the linear metric at threshold tau, straight from counts.
inline double brute_value(const std::vector<oracle_ref::Sample>& xs, double a0, double tau) {
  const auto c = oracle_ref::brute_counts(xs, tau);
  return a0 * static_cast<double>(c.tn) + (1 - a0) * static_cast<double>(c.tp);
}

inline elicit::CsvFormat wisconsin_format() {
  return elicit::CsvFormat{"class", {"id"}, {{"2", 0}, {"4", 1}}};
}

inline elicit::ScoredDataset wisconsin_scored() {
  std::ifstream in(ELICIT_DATA_DIR "/breast-cancer-wisconsin.csv");
  auto data = elicit::load_dataset(in, wisconsin_format()).dataset;
  auto parts = elicit::split(data, 0);
  return elicit::score_test(elicit::fit_scorer(parts.train, elicit::FitConfig{}).scorer,
                            parts.test);
}

}  // namespace fixtures
