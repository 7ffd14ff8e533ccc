#pragma once

#include <string>

#include <json.hpp>

#include "elicit/confusion.hpp"

namespace elicit {

// phi(c) = a0 * TN + (1 - a0) * TP, a0 in [0,1]. The weight vector
// (a0, 1 - a0) has unit L1 norm by construction.
class LinearMetric {
 public:
  // Throws ValidationError if a0 is outside [0,1] or not finite.
  explicit LinearMetric(double a0);

  double a0() const noexcept { return a0_; }
  double tn_weight() const noexcept { return a0_; }
  double tp_weight() const noexcept { return 1.0 - a0_; }

  bool operator==(const LinearMetric&) const = default;

 private:
  double a0_;
};

enum class Preference { Left, Right, Tie };

const char* to_string(Preference p) noexcept;

double value(const LinearMetric& m, const ConfusionVector& c) noexcept;

// Left iff value(left) > value(right) + tie_epsilon, Right symmetrically.
// Throws ContractViolation if the two vectors have different base rates.
Preference prefer(const LinearMetric& m, const ConfusionVector& left,
                  const ConfusionVector& right, double tie_epsilon = 0.0);

// The Bayes-optimal threshold for m is its TN weight, and back.
double optimal_threshold(const LinearMetric& m) noexcept;
LinearMetric metric_from_threshold(double tau);

// "0.141 TN + 0.859 TP": both weights rounded to 3 decimals for display only.
std::string display_string(const LinearMetric& m);

nlohmann::json to_json(const LinearMetric& m);
LinearMetric metric_from_json(const nlohmann::json& j);

}  // namespace elicit
