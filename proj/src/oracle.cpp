#include "elicit/oracle.hpp"

#include "elicit/random.hpp"

namespace elicit {

const char* to_string(Choice c) noexcept { return c == Choice::Left ? "left" : "right"; }

const char* to_string(Phase p) noexcept {
  return p == Phase::Elicitation ? "elicitation" : "evaluation";
}

Choice choice_from_string(std::string_view s) {
  if (s == "left") return Choice::Left;
  if (s == "right") return Choice::Right;
  throw ValidationError("choice must be 'left' or 'right', got '" + std::string(s) + "'");
}

Phase phase_from_string(std::string_view s) {
  if (s == "elicitation") return Phase::Elicitation;
  if (s == "evaluation") return Phase::Evaluation;
  throw ValidationError("unknown phase '" + std::string(s) + "'");
}

QuerySide make_side(const QuerySet& qs, std::size_t grid_index) {
  const auto& counts = qs.counts().at(grid_index);
  return QuerySide{qs.thresholds()[grid_index], qs.confusions()[grid_index], counts,
                   display_stats(counts)};
}

nlohmann::json to_json(const QuerySide& s) {
  return {{"threshold", s.threshold},
          {"confusion", to_json(s.confusion)},
          {"counts", to_json(s.counts)},
          {"display", to_json(s.display)}};
}

nlohmann::json to_json(const Query& q) {
  return {{"query_id", q.query_id},
          {"phase", to_string(q.phase)},
          {"left", to_json(q.left)},
          {"right", to_json(q.right)}};
}

nlohmann::json public_payload(const Query& q) {
  return {{"query_id", q.query_id},
          {"left", to_json(q.left.display)},
          {"right", to_json(q.right.display)}};
}

OracleResponse LinearOracle::answer(const Query& q) {
  const auto p = prefer(metric_, q.left.confusion, q.right.confusion, 0.0);
  return {q.query_id, p == Preference::Left ? Choice::Left : Choice::Right, 0};
}

NoisyOracle::NoisyOracle(std::unique_ptr<Oracle> base, double flip_p, std::uint64_t seed)
    : base_(std::move(base)), flip_p_(flip_p), seed_(seed) {
  if (!base_) throw ValidationError("noisy oracle needs a base oracle");
  if (!(flip_p >= 0.0 && flip_p < 0.5))
    throw ValidationError("flip probability must lie in [0, 0.5)");
}

bool NoisyOracle::flips(std::string_view query_id) const noexcept {
  const std::uint64_t h = splitmix64(seed_ ^ splitmix64(fnv1a(query_id)));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < flip_p_;
}

OracleResponse NoisyOracle::answer(const Query& q) {
  auto r = base_->answer(q);
  if (flips(q.query_id)) r.choice = r.choice == Choice::Left ? Choice::Right : Choice::Left;
  return r;
}

OracleResponse ScriptedOracle::answer(const Query& q) {
  if (next_ >= script_.size())
    throw ScriptExhausted("scripted oracle exhausted after " + std::to_string(next_) +
                          " answers (query " + q.query_id + ")");
  return {q.query_id, script_[next_++], 0};
}

}  // namespace elicit
