#include <gtest/gtest.h>

#include <cmath>

#include "elicit/error.hpp"
#include "elicit/metric.hpp"
#include "elicit/oracle.hpp"
#include "elicit/random.hpp"

using namespace elicit;

namespace {

ConfusionVector cv(double tp, double tn, double pi = 0.5) { return {tp, tn, pi}; }

Query make_query(std::string id, ConfusionVector l, ConfusionVector r) {
  Query q;
  q.query_id = std::move(id);
  q.left.confusion = l;
  q.right.confusion = r;
  return q;
}

// Random valid confusion vectors sharing one base rate.
std::vector<ConfusionVector> random_vectors(Rng& rng, std::size_t n) {
  const double pi = 0.1 + 0.8 * uniform01(rng);
  std::vector<ConfusionVector> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({pi * uniform01(rng), (1 - pi) * uniform01(rng), pi});
  return out;
}

}  // namespace

TEST(LinearMetric, ValueArithmetic) {
  EXPECT_DOUBLE_EQ(value(LinearMetric(0.5), cv(0.3, 0.4)), 0.35);
  EXPECT_EQ(value(LinearMetric(0.0), cv(0.3, 0.4)), 0.3);
  EXPECT_DOUBLE_EQ(value(LinearMetric(0.875), cv(0.2, 0.6)), 0.55);
}

TEST(LinearMetric, WeightsHaveUnitL1Norm) {
  for (double a0 : {0.0, 0.125, 0.5, 0.9, 1.0}) {
    LinearMetric m(a0);
    EXPECT_DOUBLE_EQ(m.tn_weight() + m.tp_weight(), 1.0);
  }
}

TEST(LinearMetric, RejectsOutOfRangeWeight) {
  EXPECT_THROW(LinearMetric(-0.01), ValidationError);
  EXPECT_THROW(LinearMetric(1.01), ValidationError);
  EXPECT_THROW(LinearMetric(std::nan("")), ValidationError);
}

TEST(Prefer, PicksHigherValue) {
  // 0.125*0.2 + 0.875*0.6 = 0.55 against 0.125*0.6 + 0.875*0.2 = 0.25
  EXPECT_EQ(prefer(LinearMetric(0.125), cv(0.6, 0.2), cv(0.2, 0.6)), Preference::Left);
  EXPECT_EQ(prefer(LinearMetric(0.125), cv(0.2, 0.6), cv(0.6, 0.2)), Preference::Right);
}

TEST(Prefer, IdenticalVectorsTie) {
  EXPECT_EQ(prefer(LinearMetric(0.3), cv(0.2, 0.3), cv(0.2, 0.3)), Preference::Tie);
}

TEST(Prefer, ZeroEpsilonIsStrict) {
  const auto l = cv(0.25, 0.25);
  const auto r = cv(0.25 + 2e-15, 0.25);
  EXPECT_EQ(prefer(LinearMetric(0.0), l, r, 0.0), Preference::Right);
  EXPECT_EQ(prefer(LinearMetric(0.0), l, r, 1e-12), Preference::Tie);
}

TEST(Prefer, MismatchedBaseRateIsContractViolation) {
  EXPECT_THROW(prefer(LinearMetric(0.5), cv(0.1, 0.1, 0.3), cv(0.1, 0.1, 0.4)),
               ContractViolation);
}

TEST(Prefer, ScaleInvariantAtComparisonLevel) {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const LinearMetric m(uniform01(rng));
    const double k = 0.01 + 100 * uniform01(rng);
    auto vs = random_vectors(rng, 2);
    const double l = k * m.a0() * vs[0].tn + k * (1 - m.a0()) * vs[0].tp;
    const double r = k * m.a0() * vs[1].tn + k * (1 - m.a0()) * vs[1].tp;
    const auto scaled = l > r ? Preference::Left : r > l ? Preference::Right : Preference::Tie;
    EXPECT_EQ(prefer(m, vs[0], vs[1]), scaled);
  }
}

TEST(Prefer, AsymmetricAndTransitive) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearMetric m(uniform01(rng));
    auto vs = random_vectors(rng, 12);
    for (const auto& x : vs)
      for (const auto& y : vs) {
        const auto xy = prefer(m, x, y);
        const auto yx = prefer(m, y, x);
        if (xy == Preference::Left) EXPECT_EQ(yx, Preference::Right);
        if (xy == Preference::Tie) EXPECT_EQ(yx, Preference::Tie);
        for (const auto& z : vs)
          if (xy == Preference::Left && prefer(m, y, z) == Preference::Left)
            EXPECT_EQ(prefer(m, x, z), Preference::Left);
      }
  }
}

TEST(Threshold, OptimalThresholdIsTnWeight) {
  EXPECT_EQ(optimal_threshold(LinearMetric(0.125)), 0.125);
  EXPECT_EQ(optimal_threshold(LinearMetric(0.0)), 0.0);
  EXPECT_EQ(optimal_threshold(LinearMetric(1.0)), 1.0);
}

TEST(Threshold, RoundTrip) {
  for (double a0 : {0.0, 0.03125, 0.140625, 0.5, 1.0})
    EXPECT_EQ(metric_from_threshold(optimal_threshold(LinearMetric(a0))), LinearMetric(a0));
  EXPECT_THROW(metric_from_threshold(1.5), ValidationError);
}

TEST(Threshold, ArgmaxOverGridIsNearestToOptimum) {
  // Population-style scored set: strictly increasing calibrated scores
  // s_i = (i + 0.5)/K, each carrying positive mass s_i and negative mass 1 - s_i.
  // With M = 2K copies per score, M * s_i is an odd integer, so the mass is exact.
  const int K = 200, M = 2 * K;
  std::vector<ScoredEntry> es;
  for (int i = 0; i < K; ++i) {
    const double s = (i + 0.5) / K;
    const int pos = static_cast<int>(std::lround(M * s));
    for (int j = 0; j < M; ++j) es.push_back({s, j < pos ? 1 : 0});
  }
  ScoredDataset scored(es);
  QuerySet qs(scored, 1e-3);
  for (double a0 : {0.1, 0.25, 0.4, 0.63, 0.875}) {
    const auto m = metric_from_threshold(a0);
    double best = -1;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double v = value(m, qs.confusions()[i]);
      if (v > best) best = v, best_i = i;
    }
    // The maximizing plateau contains the grid point nearest a0 (up to one
    // score spacing, since scores sit at (i+0.5)/K).
    const auto& p = *std::find_if(qs.plateaus().begin(), qs.plateaus().end(),
                                  [&](const Plateau& pl) { return pl.first <= best_i && best_i <= pl.last; });
    const double lo = qs.thresholds()[p.first], hi = qs.thresholds()[p.last];
    EXPECT_LE(lo - 1.0 / K, a0) << a0;
    EXPECT_GE(hi + 1.0 / K, a0) << a0;
    EXPECT_EQ(value(m, qs.confusions()[qs.snap(a0)]), best) << a0;
  }
}

TEST(DisplayString, ThreeDecimalForm) {
  EXPECT_EQ(display_string(metric_from_threshold(0.140625)), "0.141 TN + 0.859 TP");
  EXPECT_EQ(display_string(metric_from_threshold(0.125)), "0.125 TN + 0.875 TP");
  EXPECT_EQ(display_string(metric_from_threshold(0.03125)), "0.031 TN + 0.969 TP");
  EXPECT_EQ(display_string(metric_from_threshold(0.328125)), "0.328 TN + 0.672 TP");
  EXPECT_EQ(display_string(metric_from_threshold(0.359375)), "0.359 TN + 0.641 TP");
  EXPECT_EQ(metric_from_threshold(0.140625).a0(), 0.140625);
}

TEST(LinearOracle, PrefersHigherValue) {
  LinearOracle o{LinearMetric(0.125)};
  auto r = o.answer(make_query("q", cv(0.6, 0.2), cv(0.2, 0.6)));
  EXPECT_EQ(r.choice, Choice::Left);
  EXPECT_EQ(r.query_id, "q");
  EXPECT_EQ(r.latency_ms, 0);
}

TEST(LinearOracle, TieAnswersRight) {
  LinearOracle o{LinearMetric(0.4)};
  EXPECT_EQ(o.answer(make_query("q", cv(0.3, 0.3), cv(0.3, 0.3))).choice, Choice::Right);
}

TEST(LinearOracle, AllTnWeightPrefersLargerTn) {
  LinearOracle o{LinearMetric(1.0)};
  EXPECT_EQ(o.answer(make_query("q", cv(0.5, 0.1), cv(0.0, 0.2))).choice, Choice::Right);
  EXPECT_EQ(o.answer(make_query("q", cv(0.0, 0.3), cv(0.5, 0.2))).choice, Choice::Left);
}

TEST(NoisyOracle, ZeroFlipMatchesBase) {
  Rng rng(2);
  NoisyOracle noisy(std::make_unique<LinearOracle>(LinearMetric(0.3)), 0.0, 17);
  LinearOracle base(LinearMetric(0.3));
  for (int i = 0; i < 1000; ++i) {
    auto vs = random_vectors(rng, 2);
    auto q = make_query("q" + std::to_string(i), vs[0], vs[1]);
    EXPECT_EQ(noisy.answer(q), base.answer(q));
  }
}

TEST(NoisyOracle, FlipFractionNearTarget) {
  NoisyOracle noisy(std::make_unique<LinearOracle>(LinearMetric(0.3)), 0.1, 2024);
  LinearOracle base(LinearMetric(0.3));
  int flips = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto q = make_query("q" + std::to_string(i), cv(0.3, 0.1), cv(0.1, 0.3));
    flips += noisy.answer(q).choice != base.answer(q).choice;
  }
  EXPECT_NEAR(flips / static_cast<double>(n), 0.1, 0.01);
}

TEST(NoisyOracle, SameSeedSameSequence) {
  auto run = [](std::uint64_t seed) {
    NoisyOracle o(std::make_unique<LinearOracle>(LinearMetric(0.5)), 0.3, seed);
    std::vector<Choice> out;
    for (int i = 0; i < 200; ++i)
      out.push_back(o.answer(make_query("q" + std::to_string(i), cv(0.3, 0.1), cv(0.1, 0.2))).choice);
    return out;
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_NE(run(9), run(10));
}

TEST(NoisyOracle, RejectsFlipAtOrAboveHalf) {
  EXPECT_THROW(NoisyOracle(std::make_unique<LinearOracle>(LinearMetric(0.5)), 0.5, 0),
               ValidationError);
  EXPECT_THROW(NoisyOracle(std::make_unique<LinearOracle>(LinearMetric(0.5)), -0.1, 0),
               ValidationError);
}

TEST(ScriptedOracle, ReplaysInOrder) {
  ScriptedOracle o({Choice::Left, Choice::Right, Choice::Left});
  auto q = make_query("q", cv(0.1, 0.1), cv(0.2, 0.2));
  EXPECT_EQ(o.answer(q).choice, Choice::Left);
  EXPECT_EQ(o.answer(q).choice, Choice::Right);
  EXPECT_EQ(o.answer(q).choice, Choice::Left);
  EXPECT_THROW(o.answer(q), ScriptExhausted);
}

TEST(ScriptedOracle, EmptyScriptFailsImmediately) {
  ScriptedOracle o({});
  EXPECT_THROW(o.answer(make_query("q", cv(0.1, 0.1), cv(0.2, 0.2))), ScriptExhausted);
}

TEST(QueryPayload, HidesThresholdsAndPhase) {
  Query q = make_query("elicit-1-1", cv(0.25, 0.5), cv(0.5, 0.0));
  q.left.threshold = 0.25;
  q.right.threshold = 0.0;
  const auto s = public_payload(q).dump();
  EXPECT_EQ(s.find("threshold"), std::string::npos);
  EXPECT_EQ(s.find("phase"), std::string::npos);
  EXPECT_EQ(s.find("confusion"), std::string::npos);
  EXPECT_NE(to_json(q).dump().find("threshold"), std::string::npos);
}
