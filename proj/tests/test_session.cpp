#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "elicit/error.hpp"
#include "elicit/random.hpp"
#include "elicit/session.hpp"
#include "elicit/simulation.hpp"
#include "fixtures.hpp"

using namespace elicit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<const QuerySet> population_qs() {
  static const auto qs = std::make_shared<const QuerySet>(fixtures::population(50), 1e-3);
  return qs;
}

ServiceOptions options(fs::path dir = {}) {
  ServiceOptions o;
  o.data_dir = std::move(dir);
  o.clock = [t = std::make_shared<std::int64_t>(0)] { return *t += 7; };
  return o;
}

SessionService make_service(fs::path dir = {}) {
  return SessionService(options(std::move(dir)), {{"pop", population_qs()}});
}

class TempDir {
 public:
  TempDir() {
    Rng rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("elicit-test-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<Choice> random_script(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Choice> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(uniform01(rng) < 0.5 ? Choice::Left : Choice::Right);
  return s;
}

// Answers `count` queries from the script; returns how many were posted.
std::size_t drive(SessionService& svc, const std::string& id, const std::vector<Choice>& script,
                  std::size_t from, std::size_t count) {
  std::size_t k = from;
  for (; k < from + count && k < script.size(); ++k) {
    auto q = svc.next_query(id);
    if (q["kind"] != "query") break;
    svc.post_preference(id, q["query_id"].get<std::string>(), script[k], 100 + k);
  }
  return k - from;
}

}  // namespace

TEST(SessionService, LifecycleMatchesInProcessRun) {
  auto svc = make_service();
  auto created = svc.create_session({{"eval_seed", 42}});
  const auto id = created["session_id"].get<std::string>();
  EXPECT_EQ(id.size(), 16u);
  EXPECT_EQ(created["phase"], "familiarization");
  EXPECT_EQ(created["familiarization"]["examples"].size(), 3u);

  EXPECT_EQ(svc.next_query(id)["kind"], "familiarization");
  EXPECT_THROW(svc.post_preference(id, "elicit-1-1", Choice::Left), NotReady);
  EXPECT_THROW(svc.get_result(id), NotReady);
  svc.complete_familiarization(id, {{"comprehension", "b"}});
  EXPECT_THROW(svc.complete_familiarization(id, json::object()), Rejected);

  auto q = svc.next_query(id);
  EXPECT_EQ(q["kind"], "query");
  EXPECT_EQ(q["query_id"], "elicit-1-1");
  EXPECT_EQ(q["progress"]["answered"], 0);
  EXPECT_EQ(q.dump().find("threshold"), std::string::npos);

  const auto script = random_script(3, 35);
  EXPECT_EQ(drive(svc, id, script, 0, 35), 35u);
  EXPECT_EQ(svc.next_query(id)["kind"], "result");

  ScriptedOracle oracle(script);
  EvalConfig eval;
  eval.seed = 42;
  auto run = run_session(oracle, population_qs(), 0.05, eval);
  auto expected = result_json(run.metric, run.report);
  auto got = svc.get_result(id);
  EXPECT_EQ(got["session_id"], id);
  got.erase("session_id");
  EXPECT_EQ(got.dump(), expected.dump());
}

TEST(SessionService, DuplicateConflictAndStaleIds) {
  auto svc = make_service();
  const auto id = svc.create_session(json::object())["session_id"].get<std::string>();
  svc.complete_familiarization(id, json::object());

  auto first = svc.post_preference(id, "elicit-1-1", Choice::Left);
  EXPECT_EQ(first["status"], "accepted");
  EXPECT_EQ(first["progress"]["answered"], 1);
  const auto before = svc.snapshot(id).dump();

  auto again = svc.post_preference(id, "elicit-1-1", Choice::Left);
  EXPECT_EQ(again["status"], "duplicate");
  EXPECT_EQ(again["progress"]["answered"], 1);
  EXPECT_EQ(svc.snapshot(id).dump(), before);

  EXPECT_THROW(svc.post_preference(id, "elicit-1-1", Choice::Right), Rejected);
  EXPECT_THROW(svc.post_preference(id, "elicit-1-3", Choice::Left), Rejected);
  EXPECT_THROW(svc.post_preference(id, "eval-1", Choice::Left), Rejected);
  EXPECT_EQ(svc.snapshot(id).dump(), before);
}

TEST(SessionService, DoneSessionRejectsNewAnswers) {
  auto svc = make_service();
  const auto id = svc.create_session(json::object())["session_id"].get<std::string>();
  svc.complete_familiarization(id, json::object());
  drive(svc, id, random_script(1, 35), 0, 35);
  EXPECT_EQ(svc.post_preference(id, "eval-15", svc.snapshot(id)["eval_responses"][14][1] == "left"
                                                   ? Choice::Left
                                                   : Choice::Right)["status"],
            "duplicate");
  EXPECT_THROW(svc.post_preference(id, "eval-16", Choice::Left), Rejected);
}

TEST(SessionService, UnknownIdsAreNotFound) {
  auto svc = make_service();
  EXPECT_THROW(svc.next_query("nope"), NotFound);
  EXPECT_THROW(svc.create_session({{"dataset_id", "missing"}}), NotFound);
  EXPECT_THROW(SessionService(options(), {}), ValidationError);
}

TEST(SessionService, EvalSeedDerivedFromSessionWhenOmitted) {
  auto svc = make_service();
  auto a = svc.create_session(json::object());
  auto b = svc.create_session(json::object());
  const auto id = a["session_id"].get<std::string>();
  EXPECT_EQ(a["config"]["eval_seed"].get<std::uint64_t>(), splitmix64(0 ^ fnv1a(id)));
  EXPECT_NE(a["config"]["eval_seed"], b["config"]["eval_seed"]);
}

TEST(SessionPersistence, ReplayReconstructsIdenticalState) {
  TempDir dir;
  std::string done_id, partial_id;
  json done_snap, partial_snap;
  std::string done_transcript;
  {
    auto svc = make_service(dir.path());
    done_id = svc.create_session({{"questionnaire", {{"role", "clinician"}}}})["session_id"];
    partial_id = svc.create_session(json::object())["session_id"];
    svc.complete_familiarization(done_id, {{"q1", "a"}});
    svc.complete_familiarization(partial_id, json::object());
    drive(svc, done_id, random_script(5, 35), 0, 35);
    drive(svc, partial_id, random_script(6, 35), 0, 22);
    done_snap = svc.snapshot(done_id);
    partial_snap = svc.snapshot(partial_id);
    done_transcript = svc.transcript(done_id);
  }
  auto svc = make_service(dir.path());
  EXPECT_TRUE(svc.recovery_warnings().empty());
  EXPECT_EQ(svc.session_ids().size(), 2u);
  EXPECT_EQ(svc.snapshot(done_id).dump(), done_snap.dump());
  EXPECT_EQ(svc.snapshot(partial_id).dump(), partial_snap.dump());
  EXPECT_EQ(svc.transcript(done_id), done_transcript);
  EXPECT_EQ(svc.next_query(partial_id)["query_id"], "eval-3");
}

TEST(SessionPersistence, TornFinalLineIsDroppedAndLogStaysUsable) {
  TempDir dir;
  std::string id;
  json snap;
  {
    auto svc = make_service(dir.path());
    id = svc.create_session(json::object())["session_id"];
    svc.complete_familiarization(id, json::object());
    drive(svc, id, random_script(2, 35), 0, 6);
    snap = svc.snapshot(id);
  }
  const auto log = dir.path() / "sessions" / (id + ".jsonl");
  std::ofstream(log, std::ios::app) << R"({"event":"preference","query_id":"eli)";
  {
    auto svc = make_service(dir.path());
    ASSERT_EQ(svc.recovery_warnings().size(), 1u);
    EXPECT_EQ(svc.snapshot(id).dump(), snap.dump());
    drive(svc, id, random_script(2, 35), 6, 3);
    snap = svc.snapshot(id);
  }
  auto svc = make_service(dir.path());
  EXPECT_TRUE(svc.recovery_warnings().empty());
  EXPECT_EQ(svc.snapshot(id).dump(), snap.dump());
  EXPECT_EQ(svc.snapshot(id)["transcript"].size(), 9u);
}

TEST(SessionPersistence, CorruptMiddleLineSkipsOnlyThatSession) {
  TempDir dir;
  std::string bad, good;
  {
    auto svc = make_service(dir.path());
    bad = svc.create_session(json::object())["session_id"];
    good = svc.create_session(json::object())["session_id"];
    svc.complete_familiarization(bad, json::object());
    drive(svc, bad, random_script(2, 35), 0, 3);
  }
  const auto log = dir.path() / "sessions" / (bad + ".jsonl");
  std::vector<std::string> lines;
  {
    std::ifstream in(log);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  lines[2] = "{not json";
  {
    std::ofstream out(log, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  auto svc = make_service(dir.path());
  EXPECT_EQ(svc.recovery_warnings().size(), 1u);
  EXPECT_THROW(svc.snapshot(bad), NotFound);
  EXPECT_NO_THROW(svc.snapshot(good));
}

TEST(SessionService, ConcurrentSessionsAreIndependent) {
  TempDir dir;
  auto svc = make_service(dir.path());
  constexpr int kSessions = 8;
  std::vector<std::string> ids;
  for (int i = 0; i < kSessions; ++i) {
    ids.push_back(svc.create_session({{"eval_seed", i}})["session_id"]);
    svc.complete_familiarization(ids.back(), json::object());
  }
  std::vector<std::thread> workers;
  for (int i = 0; i < kSessions; ++i)
    workers.emplace_back([&, i] { drive(svc, ids[i], random_script(i, 35), 0, 35); });
  for (auto& w : workers) w.join();
  for (int i = 0; i < kSessions; ++i) {
    ScriptedOracle oracle(random_script(i, 35));
    EvalConfig eval;
    eval.seed = i;
    auto run = run_session(oracle, population_qs(), 0.05, eval);
    auto got = svc.get_result(ids[i]);
    got.erase("session_id");
    EXPECT_EQ(got.dump(), result_json(run.metric, run.report).dump()) << i;
  }
}
