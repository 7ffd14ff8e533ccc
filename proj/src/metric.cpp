#include "elicit/metric.hpp"

#include <cmath>
#include <cstdio>

#include "elicit/error.hpp"

namespace elicit {

LinearMetric::LinearMetric(double a0) : a0_(a0) {
  if (!(a0 >= 0.0 && a0 <= 1.0))
    throw ValidationError("metric weight a0 must lie in [0,1], got " + std::to_string(a0));
}

const char* to_string(Preference p) noexcept {
  switch (p) {
    case Preference::Left: return "left";
    case Preference::Right: return "right";
    case Preference::Tie: return "tie";
  }
  return "?";
}

double value(const LinearMetric& m, const ConfusionVector& c) noexcept {
  return m.tn_weight() * c.tn + m.tp_weight() * c.tp;
}

Preference prefer(const LinearMetric& m, const ConfusionVector& left,
                  const ConfusionVector& right, double tie_epsilon) {
  if (left.pi != right.pi)
    throw ContractViolation("cannot compare confusion vectors with different base rates");
  const double l = value(m, left);
  const double r = value(m, right);
  if (l > r + tie_epsilon) return Preference::Left;
  if (r > l + tie_epsilon) return Preference::Right;
  return Preference::Tie;
}

double optimal_threshold(const LinearMetric& m) noexcept { return m.a0(); }

LinearMetric metric_from_threshold(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ValidationError("threshold must lie in [0,1], got " + std::to_string(tau));
  return LinearMetric(tau);
}

std::string display_string(const LinearMetric& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f TN + %.3f TP", m.tn_weight(), m.tp_weight());
  return buf;
}

nlohmann::json to_json(const LinearMetric& m) { return {{"a0", m.a0()}}; }

LinearMetric metric_from_json(const nlohmann::json& j) {
  return LinearMetric(j.at("a0").get<double>());
}

}  // namespace elicit
