#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "common/error.hpp"
#include "common/io.hpp"
#include "doctest.h"
#include "neural/serialize.hpp"
#include "pipeline/commands.hpp"
#include "problems/instance.hpp"

using namespace roccg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Read(const fs::path& p) { return ReadFile(p.string()); }

int Lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

problems::KnapsackInstance RunningExample() {
  problems::KnapsackInstance kp;
  kp.id = "running";
  kp.outsource = {5, 5};
  kp.profit = {10, 8};
  kp.deviation = {4, 4};
  kp.weight = {3, 2};
  kp.repair = {1, 1};
  kp.capacity = 4;
  kp.budget = 1;
  return kp;
}

// Toy dataset and a briefly trained model for `family`, built once per run.
fs::path ToyModel(const std::string& family) {
  static std::set<std::string> built;
  const fs::path dir = fs::temp_directory_path() / ("roccg_toy_" + family);
  if (built.count(family)) return dir / "model" / "model.json";
  built.insert(family);
  fs::remove_all(dir);
  pipeline::RunData({{"family", family}, {"instances", 4}, {"decisions", 4}, {"scenarios", 5},
                     {"n_min", 4}, {"n_max", 5}, {"seed", 3}, {"out", (dir / "data").string()}});
  pipeline::RunTrain({{"dataset", (dir / "data").string()}, {"epochs", 20},
                      {"batch_size", 16}, {"validation_interval", 5}, {"seed", 3},
                      {"out", (dir / "model").string()}});
  return dir / "model" / "model.json";
}

}  // namespace

TEST_CASE("gen with zero count writes an empty index") {
  const fs::path dir = TempDir("roccg_gen_empty");
  pipeline::RunGen({{"count", 0}, {"out", (dir / "out").string()}});
  const json index = ReadJsonFile((dir / "out" / "index.json").string());
  CHECK(index["instances"].empty());
  const json cfg = ReadJsonFile((dir / "out" / "run_config.json").string());
  CHECK(cfg["count"] == 0);
  CHECK(cfg["command"] == "gen");
  CHECK(cfg["family"] == "knapsack");
}

TEST_CASE("gen is reproducible and writes loadable instances") {
  const fs::path dir = TempDir("roccg_gen_repeat");
  const json cfg = {{"family", "capital_budgeting"}, {"count", 3}, {"n_min", 4},
                    {"n_max", 6}, {"seed", 11}};
  json a = cfg, b = cfg;
  a["out"] = (dir / "a").string();
  b["out"] = (dir / "b").string();
  pipeline::RunGen(a);
  pipeline::RunGen(b);
  const json index = ReadJsonFile((dir / "a" / "index.json").string());
  REQUIRE(index["instances"].size() == 3);
  for (const json& e : index["instances"]) {
    const std::string file = e["file"];
    CHECK(Read(dir / "a" / file) == Read(dir / "b" / file));
    const problems::Instance inst = problems::LoadInstance((dir / "a" / file).string());
    CHECK(problems::NumItems(inst) >= 4);
    CHECK(problems::NumItems(inst) <= 6);
  }
  CHECK(Read(dir / "a" / "index.json") == Read(dir / "b" / "index.json"));
}

TEST_CASE("gen into an unwritable path fails without an index") {
  const fs::path dir = TempDir("roccg_gen_bad");
  { std::ofstream(dir / "file") << "x"; }
  const std::string out = (dir / "file" / "sub").string();
  CHECK_THROWS_AS(pipeline::RunGen({{"count", 2}, {"out", out}}), InputError);
  CHECK(!fs::exists(dir / "file" / "sub" / "index.json"));
}

TEST_CASE("config errors are usage errors") {
  CHECK_THROWS_AS(pipeline::RunGen({{"count", 1}}), UsageError);
  CHECK_THROWS_AS(pipeline::RunGen({{"count", 1}, {"out", "/tmp/x"}, {"colour", 1}}),
                  UsageError);
  CHECK_THROWS_AS(pipeline::RunGen({{"count", "many"}, {"out", "/tmp/x"}}), UsageError);
  CHECK_THROWS_AS(pipeline::RunGen({{"count", 1.5}, {"out", "/tmp/x"}}), UsageError);
  CHECK_THROWS_AS(pipeline::RunGen(json::array()), UsageError);
  CHECK_THROWS_AS(pipeline::RunCommand("frobnicate", json::object()), UsageError);
}

TEST_CASE("data writes the counted records reproducibly") {
  const fs::path dir = TempDir("roccg_data");
  const json cfg = {{"instances", 2}, {"decisions", 3}, {"scenarios", 4}, {"seed", 5}};
  json a = cfg, b = cfg;
  a["out"] = (dir / "a").string();
  b["out"] = (dir / "b").string();
  pipeline::RunData(a, 1);
  pipeline::RunData(b, 2);
  const std::string jsonl = Read(dir / "a" / "dataset.jsonl");
  CHECK(Lines(jsonl) == 24);
  CHECK(jsonl == Read(dir / "b" / "dataset.jsonl"));
  CHECK(Read(dir / "a" / "manifest.json") == Read(dir / "b" / "manifest.json"));
  CHECK(ReadJsonFile((dir / "a" / "manifest.json").string())["records"] == 24);
}

TEST_CASE("train on a toy dataset writes a model and the curve") {
  const fs::path dir = TempDir("roccg_train");
  pipeline::RunData({{"instances", 2}, {"decisions", 3}, {"scenarios", 4},
                     {"out", (dir / "data").string()}});
  const json cfg = {{"dataset", (dir / "data").string()}, {"epochs", 20},
                    {"validation_interval", 5}, {"batch_size", 8}};
  json a = cfg, b = cfg;
  a["out"] = (dir / "a").string();
  b["out"] = (dir / "b").string();
  const json summary = pipeline::RunTrain(a);
  pipeline::RunTrain(b);
  CHECK(summary["train_records"] == 20);
  CHECK(summary["validation_records"] == 4);
  const std::string curve = Read(dir / "a" / "curve.csv");
  CHECK(Lines(curve) == 1 + 20 / 5);
  CHECK(curve.rfind("epoch,train_mse,train_mae,val_mae\n", 0) == 0);
  const neural::ValueModel model = neural::LoadModel((dir / "a" / "model.json").string());
  CHECK(model.ready());
  CHECK(model.family == "knapsack");
  CHECK(Read(dir / "a" / "model.json") == Read(dir / "b" / "model.json"));
  CHECK(Read(dir / "a" / "curve.csv") == Read(dir / "b" / "curve.csv"));
}

TEST_CASE("train rejects a dataset with another schema version") {
  const fs::path dir = TempDir("roccg_train_schema");
  pipeline::RunData({{"instances", 1}, {"decisions", 2}, {"scenarios", 2},
                     {"out", (dir / "data").string()}});
  json manifest = ReadJsonFile((dir / "data" / "manifest.json").string());
  manifest["schema_version"] = 99;
  WriteJsonFile((dir / "data" / "manifest.json").string(), manifest);
  try {
    pipeline::RunTrain({{"dataset", (dir / "data").string()}, {"epochs", 1},
                        {"validation_interval", 1}, {"out", (dir / "m").string()}});
    FAIL("expected a schema error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
  }
}

TEST_CASE("solve brute on the running example") {
  const fs::path dir = TempDir("roccg_solve_brute");
  problems::SaveInstance(RunningExample(), (dir / "running.json").string());
  const json sol = pipeline::RunSolve({{"instance", (dir / "running.json").string()},
                                       {"method", "brute"},
                                       {"out", (dir / "out").string()}});
  CHECK(sol["x"] == json::array({1, 1}));
  CHECK(sol["objective"].get<double>() == doctest::Approx(-13));
  const json written = ReadJsonFile((dir / "out" / "solution.json").string());
  CHECK(written == sol);
  CHECK(fs::exists(dir / "out" / "run_config.json"));
  CHECK(fs::exists(dir / "out" / "log.jsonl"));
}

TEST_CASE("solve ccg agrees with brute and logs every iteration") {
  const fs::path dir = TempDir("roccg_solve_ccg");
  problems::SaveInstance(RunningExample(), (dir / "running.json").string());
  const json sol = pipeline::RunSolve({{"instance", (dir / "running.json").string()},
                                       {"method", "ccg"},
                                       {"out", (dir / "out").string()}});
  CHECK(sol["objective"].get<double>() == doctest::Approx(-13));
  CHECK(sol["evaluated_objective"].get<double>() == doctest::Approx(-13));
  CHECK(sol["termination"] == "epsilon-converged");
  CHECK(Lines(Read(dir / "out" / "log.jsonl")) == sol["iterations"].get<int>());
}

TEST_CASE("solve ml-ccg with a huge epsilon logs one iteration") {
  const fs::path dir = TempDir("roccg_solve_ml");
  const fs::path model = ToyModel("knapsack");
  pipeline::RunGen({{"count", 1}, {"n_min", 5}, {"n_max", 5}, {"out", (dir / "g").string()}});
  const json index = ReadJsonFile((dir / "g" / "index.json").string());
  const std::string inst = (dir / "g" / index["instances"][0]["file"].get<std::string>()).string();
  const json sol = pipeline::RunSolve({{"instance", inst},
                                       {"model", model.string()},
                                       {"epsilon", 1e9},
                                       {"out", (dir / "out").string()}});
  CHECK(sol["iterations"] == 1);
  CHECK(sol["termination"] == "epsilon-converged");
  CHECK(Lines(Read(dir / "out" / "log.jsonl")) == 1);
  CHECK(sol["evaluated_objective"].is_number());
}

TEST_CASE("solve guards") {
  const fs::path dir = TempDir("roccg_solve_guard");
  const std::string cb = (dir / "cb.json").string();
  problems::SaveInstance(problems::GenerateCapitalBudgeting(4, 1), cb);
  try {
    pipeline::RunSolve({{"instance", cb}, {"method", "ccg"}, {"out", (dir / "o").string()}});
    FAIL("expected a rejection");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("intractable") != std::string::npos);
  }
  CHECK_THROWS_AS(
      pipeline::RunSolve({{"instance", cb}, {"method", "ml-ccg"}, {"out", (dir / "o").string()}}),
      UsageError);
  CHECK_THROWS_AS(pipeline::RunSolve({{"instance", cb},
                                      {"method", "ml-ccg"},
                                      {"model", ToyModel("knapsack").string()},
                                      {"out", (dir / "o").string()}}),
                  UsageError);
  CHECK_THROWS_AS(
      pipeline::RunSolve({{"instance", cb}, {"method", "simplex"}, {"out", (dir / "o").string()}}),
      UsageError);
  CHECK_THROWS_AS(pipeline::RunSolve({{"instance", (dir / "missing.json").string()},
                                      {"method", "brute"},
                                      {"out", (dir / "o").string()}}),
                  InputError);
  CHECK(!fs::exists(dir / "o"));
}

TEST_CASE("bench anchors brute at zero and is reproducible") {
  const fs::path dir = TempDir("roccg_bench");
  pipeline::RunGen({{"count", 2}, {"n_min", 5}, {"n_max", 6}, {"seed", 2},
                    {"out", (dir / "g").string()}});
  const json cfg = {{"instances", (dir / "g").string()},
                    {"methods", {"brute", "ml-ccg", "ccg"}},
                    {"model", ToyModel("knapsack").string()}};
  json a = cfg, b = cfg;
  a["out"] = (dir / "a").string();
  b["out"] = (dir / "b").string();
  const json summary = pipeline::RunBench(a, 2);
  pipeline::RunBench(b, 1);
  const std::string csv = Read(dir / "a" / "report.csv");
  CHECK(csv == Read(dir / "b" / "report.csv"));
  CHECK(Read(dir / "a" / "summary.json") == Read(dir / "b" / "summary.json"));
  CHECK(Lines(csv) == 1 + 2 * 3);
  REQUIRE(summary["methods"].size() == 3);
  CHECK(summary["methods"][0]["method"] == "brute");
  CHECK(summary["methods"][0]["median_re_pct"] == 0.0);
  CHECK(summary["methods"][2]["mean_re_pct"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(!ReadJsonFile((dir / "a" / "run_config.json").string()).contains("threads"));
}

TEST_CASE("bench on capital budgeting scores every method on one pool") {
  const fs::path dir = TempDir("roccg_bench_cb");
  pipeline::RunGen({{"family", "capital_budgeting"}, {"count", 1}, {"n_min", 4},
                    {"n_max", 4}, {"out", (dir / "g").string()}});
  const json summary = pipeline::RunBench({{"instances", (dir / "g").string()},
                                           {"methods", {"ml-ccg", "brute"}},
                                           {"model", ToyModel("capital_budgeting").string()},
                                           {"eval_samples", 200},
                                           {"out", (dir / "a").string()}});
  // brute optimizes over the same pool, so it is the best method
  CHECK(summary["methods"][1]["median_re_pct"] == 0.0);
}

TEST_CASE("bench checks every method before solving") {
  const fs::path dir = TempDir("roccg_bench_guard");
  pipeline::RunGen({{"count", 1}, {"n_min", 4}, {"n_max", 4}, {"out", (dir / "g").string()}});
  CHECK_THROWS_AS(pipeline::RunBench({{"instances", (dir / "g").string()},
                                      {"methods", {"brute", "ml-ccg"}},
                                      {"out", (dir / "a").string()}}),
                  UsageError);
  CHECK_THROWS_AS(pipeline::RunBench({{"instances", (dir / "g").string()},
                                      {"methods", {"brute", "brute"}},
                                      {"out", (dir / "a").string()}}),
                  UsageError);
  CHECK_THROWS_AS(pipeline::RunBench({{"instances", (dir / "g").string()},
                                      {"methods", {"greedy"}},
                                      {"out", (dir / "a").string()}}),
                  UsageError);
  CHECK(!fs::exists(dir / "a"));
}
