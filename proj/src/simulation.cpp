#include "elicit/simulation.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <thread>

#include "elicit/error.hpp"
#include "elicit/random.hpp"

namespace elicit {

SessionRun run_session(Oracle& oracle, std::shared_ptr<const QuerySet> query_set, double epsilon,
                       const EvalConfig& eval, const Clock& clock) {
  auto run = run_to_completion(oracle, query_set, epsilon, clock);
  const auto queries = generate_eval_queries(*query_set, eval);
  std::vector<OracleResponse> responses;
  for (const auto& q : queries) {
    auto r = oracle.answer(q);
    r.query_id = q.query_id;
    run.transcript.push_back({q, r, clock ? clock() : 0});
    responses.push_back(std::move(r));
  }
  const std::size_t n_elicit = run.transcript.size() - queries.size();
  return {run.metric, compute_m(run.metric, queries, responses), std::move(run.transcript),
          n_elicit};
}

std::vector<SimulationRow> simulate(std::shared_ptr<const QuerySet> query_set,
                                    const SimulationConfig& config) {
  if (config.true_a0s.empty()) throw ValidationError("simulation needs at least one true a0");
  if (config.noises.empty()) throw ValidationError("simulation needs at least one noise level");
  if (config.repeats == 0) throw ValidationError("repeats must be at least 1");

  const std::size_t n_noise = config.noises.size();
  const std::size_t total = config.true_a0s.size() * n_noise * config.repeats;
  std::vector<SimulationRow> rows(total);

  auto run_one = [&](std::size_t idx) {
    const std::size_t repeat = idx % config.repeats;
    const std::size_t noise_i = (idx / config.repeats) % n_noise;
    const std::size_t a0_i = idx / (config.repeats * n_noise);
    const double a0 = config.true_a0s[a0_i];
    const double noise = config.noises[noise_i];
    const std::uint64_t key = splitmix64(config.seed ^ splitmix64(idx));

    std::unique_ptr<Oracle> oracle = std::make_unique<LinearOracle>(LinearMetric(a0));
    if (noise > 0.0) oracle = std::make_unique<NoisyOracle>(std::move(oracle), noise, key);
    EvalConfig eval{config.eval_queries, config.min_gap, splitmix64(key)};
    const auto s = run_session(*oracle, query_set, config.epsilon, eval);

    rows[idx] = {a0,       noise, repeat, s.metric.a0(), std::abs(s.metric.a0() - a0),
                 s.elicitation_queries, s.report.m_value, s.report.m_display()};
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.threads, total));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i; (i = next++) < total;) run_one(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

namespace {

std::string shortest(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SimulationRow>& rows) {
  out << "true_a0,noise,repeat,elicited_a0,abs_error,queries,m_value,m\n";
  for (const auto& r : rows)
    out << shortest(r.true_a0) << ',' << shortest(r.noise) << ',' << r.repeat << ','
        << shortest(r.elicited_a0) << ',' << shortest(r.abs_error) << ',' << r.queries << ','
        << shortest(r.m_value) << ',' << r.m_display << '\n';
}

void write_table(std::ostream& out, const std::vector<SimulationRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%8s %6s %6s %11s %9s %7s %5s\n", "true_a0", "noise", "rep",
                "elicited_a0", "|error|", "queries", "M");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%8.4f %6.3f %6zu %11.6f %9.6f %7zu %5d\n", r.true_a0,
                  r.noise, r.repeat, r.elicited_a0, r.abs_error, r.queries, r.m_display);
    out << buf;
  }
}

}  // namespace elicit
