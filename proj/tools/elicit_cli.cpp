// elicit: data preparation, simulated elicitation sweeps, and the session
// service.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "elicit/confusion.hpp"
#include "elicit/dataset.hpp"
#include "elicit/error.hpp"
#include "elicit/http_api.hpp"
#include "elicit/session.hpp"
#include "elicit/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace elicit;

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
  if (!out) throw Error("cannot write " + p.string());
}

std::map<std::string, int> parse_label_map(const std::string& text) {
  std::map<std::string, int> m;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("label map entry '" + item + "' needs raw:0|1");
    const auto to = item.substr(colon + 1);
    if (to != "0" && to != "1") throw ValidationError("label map target must be 0 or 1");
    m[item.substr(0, colon)] = to == "1";
  }
  return m;
}

std::shared_ptr<const QuerySet> load_query_set(const fs::path& p) {
  auto in = open_input(p);
  return std::make_shared<const QuerySet>(query_set_from_json(json::parse(in)));
}

// "id=path" or "path" (id = file stem, or parent directory name for query_set.json).
std::map<std::string, std::shared_ptr<const QuerySet>> load_datasets(
    const std::vector<std::string>& specs) {
  std::map<std::string, std::shared_ptr<const QuerySet>> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    fs::path path = eq == std::string::npos ? s : s.substr(eq + 1);
    std::string id = eq != std::string::npos ? s.substr(0, eq)
                     : path.stem() == "query_set" && path.has_parent_path()
                         ? fs::absolute(path).parent_path().filename().string()
                         : path.stem().string();
    out[id] = load_query_set(path);
  }
  return out;
}

struct PrepareArgs {
  std::string input;
  std::string out_dir;
  std::string label_column = "class";
  std::vector<std::string> drop;
  std::string label_map;
  bool prescored = false;
  std::uint64_t split_seed = 0;
  double step = 1e-4;
  std::string fit_config;
  FitConfig fit;
};

int cmd_prepare(const PrepareArgs& a) {
  fs::create_directories(a.out_dir);
  const fs::path out = a.out_dir;
  json summary;
  std::optional<ScoredDataset> scored;

  if (a.prescored) {
    auto in = open_input(a.input);
    scored = load_scored_csv(in);
    summary["source"] = "prescored";
  } else {
    CsvFormat format;
    format.label_column = a.label_column;
    format.drop_columns = a.drop;
    if (!a.label_map.empty()) format.label_map = parse_label_map(a.label_map);
    auto in = open_input(a.input);
    auto loaded = load_dataset(in, format);

    FitConfig fit = a.fit;
    if (!a.fit_config.empty()) {
      auto fin = open_input(a.fit_config);
      fit = fit_config_from_json(json::parse(fin));
    }
    auto parts = split(loaded.dataset, a.split_seed);
    auto fitted = fit_scorer(parts.train, fit);
    if (!fitted.converged)
      std::cerr << "warning: logistic regression stopped at max_iter with gradient norm "
                << fitted.gradient_norm << "\n";
    scored = score_test(fitted.scorer, parts.test);
    write_file(out / "scorer.json", to_json(fitted.scorer).dump(2));

    summary["source"] = "trained";
    summary["records"] = loaded.dataset.size();
    summary["dropped_rows"] = loaded.dropped_rows;
    summary["feature_names"] = loaded.feature_names;
    summary["train_size"] = parts.train.size();
    summary["test_size"] = parts.test.size();
    summary["fit"] = {{"config", to_json(fit)}, {"converged", fitted.converged},
                      {"iterations", fitted.iterations}, {"gradient_norm", fitted.gradient_norm}};
  }

  const QuerySet qs(*scored, a.step);
  {
    std::ofstream f(out / "scored.csv");
    write_scored_csv(f, *scored);
  }
  write_file(out / "query_set.json", to_json(qs).dump());

  summary["pi"] = scored->pi();
  summary["auc"] = roc_auc(*scored);
  summary["n_test"] = scored->size();
  summary["thresholds"] = qs.size();
  summary["distinct_confusions"] = qs.plateaus().size();
  write_file(out / "summary.json", summary.dump(2));

  if (summary.contains("dropped_rows"))
    std::printf("records        %zu (%zu dropped for missing values)\n",
                summary["records"].get<std::size_t>(), summary["dropped_rows"].get<std::size_t>());
  std::printf("test entries   %zu\n", scored->size());
  std::printf("pi             %.6f\n", scored->pi());
  std::printf("auc            %.6f\n", roc_auc(*scored));
  std::printf("thresholds     %zu\n", qs.size());
  std::printf("distinct conf. %zu\n", qs.plateaus().size());
  std::printf("wrote          %s\n", (out / "query_set.json").string().c_str());
  return 0;
}

struct SimulateArgs {
  std::string query_set;
  std::size_t synthetic = 0;
  std::uint64_t synthetic_seed = 1;
  double step = 1e-4;
  SimulationConfig sim;
  std::string csv;
};

int cmd_simulate(SimulateArgs a) {
  std::shared_ptr<const QuerySet> qs;
  if (!a.query_set.empty()) {
    qs = load_query_set(a.query_set);
  } else if (a.synthetic > 0) {
    qs = std::make_shared<const QuerySet>(synthetic_smooth(a.synthetic, a.synthetic_seed), a.step);
  } else {
    throw ValidationError("simulate needs --query-set or --synthetic N");
  }
  if (a.sim.true_a0s.empty())
    for (int k = 1; k <= 19; ++k) a.sim.true_a0s.push_back(k * 0.05);

  const auto rows = simulate(qs, a.sim);
  write_table(std::cout, rows);
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    write_csv(f, rows);
    if (!f) throw Error("cannot write " + a.csv);
  }
  return 0;
}

struct ServeArgs {
  std::vector<std::string> query_sets;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "sessions";
  std::string static_dir;
  ServiceOptions options;
};

std::atomic<HttpApi*> g_api{nullptr};

extern "C" void on_signal(int) {
  if (auto* api = g_api.load()) api->stop();
}

int cmd_serve(ServeArgs a) {
  a.options.data_dir = a.data_dir;
  SessionService service(a.options, load_datasets(a.query_sets));
  for (const auto& w : service.recovery_warnings()) std::cerr << "warning: " << w << "\n";
  HttpApi api(service, a.static_dir);
  const int port = api.bind(a.host, a.port);
  std::printf("serving %zu session(s) on http://%s:%d\n", service.session_ids().size(),
              a.host.c_str(), port);
  std::fflush(stdout);
  g_api = &api;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  api.serve();
  g_api = nullptr;
  return 0;
}

int cmd_report(const std::vector<std::string>& query_sets, const std::string& data_dir) {
  ServiceOptions options;
  options.data_dir = data_dir;
  SessionService service(options, load_datasets(query_sets));
  std::printf("%-18s %-24s %5s\n", "session", "metric", "M");
  for (const auto& id : service.session_ids()) {
    json r;
    try {
      r = service.get_result(id);
    } catch (const NotReady&) {
      std::printf("%-18s %-24s %5s\n", id.c_str(), "(in progress)", "-");
      continue;
    }
    std::printf("%-18s %-24s %5d\n", id.c_str(), r["metric_display"].get<std::string>().c_str(),
                r["m"].get<int>());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elicit a linear classification metric from pairwise preferences"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Train a scorer and build the query set");
  p->add_option("input", prep.input, "Labeled CSV, or score,label CSV with --prescored")
      ->required()
      ->check(CLI::ExistingFile);
  p->add_option("-o,--out", prep.out_dir, "Output directory")->required();
  p->add_option("--label-column", prep.label_column, "Name of the label column")
      ->capture_default_str();
  p->add_option("--drop", prep.drop, "Columns to ignore (e.g. a sample id)")->delimiter(',');
  p->add_option("--label-map", prep.label_map, "Raw label mapping, e.g. 2:0,4:1");
  p->add_flag("--prescored", prep.prescored, "Input is score,label; skip training");
  p->add_option("--split-seed", prep.split_seed, "Seed for the train/test split")
      ->capture_default_str();
  p->add_option("--step", prep.step, "Threshold grid step")->capture_default_str();
  p->add_option("--fit-config", prep.fit_config, "JSON {step_size,l2,max_iter,tol,seed}")
      ->check(CLI::ExistingFile);
  p->add_option("--step-size", prep.fit.step_size, "Gradient descent step")->capture_default_str();
  p->add_option("--l2", prep.fit.l2, "L2 penalty")->capture_default_str();
  p->add_option("--max-iter", prep.fit.max_iter, "Iteration cap")->capture_default_str();
  p->add_option("--tol", prep.fit.tol, "Gradient norm tolerance")->capture_default_str();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run simulated-oracle elicitation sweeps");
  s->add_option("--query-set", sim.query_set, "query_set.json from prepare")
      ->check(CLI::ExistingFile);
  s->add_option("--synthetic", sim.synthetic, "Use a synthetic smooth scored set of N entries");
  s->add_option("--synthetic-seed", sim.synthetic_seed)->capture_default_str();
  s->add_option("--step", sim.step, "Grid step for --synthetic")->capture_default_str();
  s->add_option("--a0", sim.sim.true_a0s, "True a0 values (default 0.05..0.95)")->delimiter(',');
  s->add_option("--noise", sim.sim.noises, "Flip probabilities")->delimiter(',')->capture_default_str();
  s->add_option("--epsilon", sim.sim.epsilon)->capture_default_str();
  s->add_option("--repeats", sim.sim.repeats)->capture_default_str();
  s->add_option("--eval-queries", sim.sim.eval_queries)->capture_default_str();
  s->add_option("--min-gap", sim.sim.min_gap)->capture_default_str();
  s->add_option("--seed", sim.sim.seed)->capture_default_str();
  s->add_option("--threads", sim.sim.threads)->capture_default_str();
  s->add_option("--csv", sim.csv, "Also write rows to this CSV file");

  ServeArgs serve;
  auto* v = app.add_subcommand("serve", "Run the HTTP session service");
  v->add_option("--query-set", serve.query_sets, "query_set.json, optionally id=path")->required();
  v->add_option("--host", serve.host)->capture_default_str();
  v->add_option("--port", serve.port)->capture_default_str();
  v->add_option("--data-dir", serve.data_dir, "Session logs directory")->capture_default_str();
  v->add_option("--static", serve.static_dir, "Directory of UI files to serve at /")
      ->check(CLI::ExistingDirectory);
  v->add_option("--epsilon", serve.options.default_epsilon)->capture_default_str();
  v->add_option("--eval-queries", serve.options.eval_queries)->capture_default_str();
  v->add_option("--min-gap", serve.options.min_gap)->capture_default_str();
  v->add_option("--seed", serve.options.base_seed, "Base seed for evaluation queries")
      ->capture_default_str();

  std::vector<std::string> report_sets;
  std::string report_dir = "sessions";
  auto* r = app.add_subcommand("report", "Tabulate elicited metrics and M for stored sessions");
  r->add_option("--query-set", report_sets, "query_set.json, optionally id=path")->required();
  r->add_option("--data-dir", report_dir)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (p->parsed()) return cmd_prepare(prep);
    if (s->parsed()) return cmd_simulate(sim);
    if (v->parsed()) return cmd_serve(serve);
    if (r->parsed()) return cmd_report(report_sets, report_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
