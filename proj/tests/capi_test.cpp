#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "roccg/roccg.h"

namespace fs = std::filesystem;

namespace {

fs::path TempDir(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kRunningExample = R"({"schema_version": 1, "family": "knapsack", "id": "running",
  "n": 2, "seed": 0, "correlation": "UN", "profit": [10, 8], "deviation": [4, 4],
  "outsource": [5, 5], "weight": [3, 2], "repair": [1, 1], "capacity": 4, "budget": 1})";

}  // namespace

TEST_CASE("brute and ccg solve the running example through the handles") {
  const fs::path dir = TempDir("roccg_capi_running");
  roccg_instance* generated = nullptr;
  REQUIRE(roccg_instance_generate("knapsack", 2, 1, &generated) == ROCCG_OK);
  REQUIRE(roccg_instance_save(generated, (dir / "kp.json").c_str()) == ROCCG_OK);
  roccg_instance_free(generated);

  CHECK(nlohmann::json::parse(std::ifstream(dir / "kp.json"))["n"] == 2);
  std::ofstream(dir / "running.json") << kRunningExample;

  roccg_instance* inst = nullptr;
  REQUIRE(roccg_instance_load((dir / "running.json").c_str(), &inst) == ROCCG_OK);
  CHECK(roccg_instance_size(inst) == 2);
  for (const char* method : {"brute", "ccg"}) {
    roccg_solution* sol = nullptr;
    REQUIRE(roccg_solve(inst, nullptr, method, nullptr, &sol) == ROCCG_OK);
    CHECK(std::string(roccg_last_error()).empty());
    int x[2] = {0, 0};
    REQUIRE(roccg_solution_size(sol) == 2);
    REQUIRE(roccg_solution_x(sol, x, 2) == ROCCG_OK);
    CHECK(x[0] == 1);
    CHECK(x[1] == 1);
    CHECK(roccg_solution_objective(sol) == doctest::Approx(-13));
    CHECK(roccg_solution_evaluated(sol) == doctest::Approx(-13));
    CHECK(roccg_solution_x(sol, x, 1) == ROCCG_ERR_USAGE);
    CHECK(nlohmann::json::parse(roccg_solution_json(sol))["method"] == method);
    roccg_solution_free(sol);
  }
  const int x[2] = {1, 1};
  double value = 0.0;
  REQUIRE(roccg_evaluate(inst, x, 2, &value) == ROCCG_OK);
  CHECK(value == doctest::Approx(-13));
  CHECK(roccg_evaluate(inst, x, 1, &value) == ROCCG_ERR_INPUT);
  roccg_instance_free(inst);
}

TEST_CASE("errors come back as status codes with a message") {
  roccg_instance* inst = nullptr;
  CHECK(roccg_instance_load("/nonexistent/instance.json", &inst) == ROCCG_ERR_INPUT);
  CHECK(inst == nullptr);
  CHECK(std::string(roccg_last_error()).find("instance.json") != std::string::npos);

  CHECK(roccg_instance_generate("tsp", 4, 1, &inst) == ROCCG_ERR_INPUT);
  CHECK(roccg_instance_generate("knapsack", 4, 1, nullptr) == ROCCG_ERR_USAGE);
  REQUIRE(roccg_instance_generate("capital_budgeting", 4, 1, &inst) == ROCCG_OK);
  roccg_solution* sol = nullptr;
  CHECK(roccg_solve(inst, nullptr, "ccg", nullptr, &sol) == ROCCG_ERR_USAGE);
  CHECK(std::string(roccg_last_error()).find("intractable") != std::string::npos);
  CHECK(roccg_solve(inst, nullptr, "ml-ccg", nullptr, &sol) == ROCCG_ERR_USAGE);
  CHECK(roccg_solve(inst, nullptr, "brute", "{not json", &sol) == ROCCG_ERR_USAGE);
  CHECK(roccg_solve(inst, nullptr, "brute", R"({"colour": 1})", &sol) == ROCCG_ERR_USAGE);
  CHECK(sol == nullptr);
  double value;
  const int x[4] = {0, 0, 0, 0};
  CHECK(roccg_evaluate(inst, x, 4, &value) == ROCCG_ERR_USAGE);

  REQUIRE(roccg_solve(inst, nullptr, "brute", R"({"eval_samples": 50})", &sol) == ROCCG_OK);
  CHECK(std::string(roccg_solution_termination(sol)) == "optimal");
  CHECK(std::isfinite(roccg_solution_evaluated(sol)));
  roccg_solution_free(sol);
  roccg_instance_free(inst);

  CHECK(roccg_instance_size(nullptr) == -1);
  roccg_instance_free(nullptr);
  roccg_solution_free(nullptr);
  roccg_model_free(nullptr);
}

TEST_CASE("pipeline commands run through the C entry point") {
  const fs::path dir = TempDir("roccg_capi_run");
  const std::string gen = R"({"count": 2, "n_min": 4, "n_max": 4, "out": ")" +
                          (dir / "g").string() + "\"}";
  char* summary = nullptr;
  REQUIRE(roccg_run("gen", gen.c_str(), 1, &summary) == ROCCG_OK);
  CHECK(nlohmann::json::parse(summary)["instances"] == 2);
  roccg_string_free(summary);
  CHECK(roccg_run("gen", gen.c_str(), 1, nullptr) == ROCCG_OK);
  CHECK(roccg_run("nope", "{}", 1, nullptr) == ROCCG_ERR_USAGE);
  CHECK(roccg_run("gen", "[1]", 1, nullptr) == ROCCG_ERR_USAGE);
  CHECK(roccg_run(nullptr, "{}", 1, nullptr) == ROCCG_ERR_USAGE);

  const std::string data = R"({"instances": 2, "decisions": 2, "scenarios": 3, "out": ")" +
                           (dir / "d").string() + "\"}";
  REQUIRE(roccg_run("data", data.c_str(), 2, nullptr) == ROCCG_OK);
  const std::string train = R"({"dataset": ")" + (dir / "d").string() +
                            R"(", "epochs": 2, "validation_interval": 1, "out": ")" +
                            (dir / "m").string() + "\"}";
  REQUIRE(roccg_run("train", train.c_str(), 1, nullptr) == ROCCG_OK);
  roccg_model* model = nullptr;
  REQUIRE(roccg_model_load((dir / "m" / "model.json").c_str(), &model) == ROCCG_OK);
  roccg_instance* inst = nullptr;
  REQUIRE(roccg_instance_generate("knapsack", 4, 3, &inst) == ROCCG_OK);
  roccg_solution* sol = nullptr;
  REQUIRE(roccg_solve(inst, model, "ml-ccg", R"({"max_iterations": 3})", &sol) == ROCCG_OK);
  CHECK(roccg_solution_iterations(sol) >= 1);
  CHECK(roccg_solution_iterations(sol) <= 3);
  roccg_solution_free(sol);
  roccg_instance_free(inst);
  roccg_model_free(model);
}
