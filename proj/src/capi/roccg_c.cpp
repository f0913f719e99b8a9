#include "roccg/roccg.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <variant>
#include <vector>

#include "common/error.hpp"
#include "eval/evaluate.hpp"
#include "json.hpp"
#include "neural/serialize.hpp"
#include "pipeline/commands.hpp"
#include "problems/instance.hpp"

struct roccg_instance {
  roccg::problems::Instance inst;
};

struct roccg_model {
  roccg::neural::ValueModel model;
};

struct roccg_solution {
  std::vector<int> x;
  double objective = 0.0;
  double evaluated = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string termination;
  std::string json;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

roccg_status Fail(roccg_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes and the thread's last
// error.
template <typename Fn>
roccg_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return ROCCG_OK;
  } catch (const roccg::Error& e) {
    return Fail(static_cast<roccg_status>(e.kind()), e.what());
  } catch (const json::exception& e) {
    return Fail(ROCCG_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(ROCCG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(ROCCG_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(ROCCG_ERR_INTERNAL, "unknown failure");
  }
}

json ParseConfig(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw roccg::UsageError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

void Require(const void* p, const char* name) {
  if (!p) throw roccg::UsageError(std::string(name) + " must not be NULL");
}

double Number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return std::stod(v.get<std::string>());
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

extern "C" {

const char* roccg_version(void) { return "1.0.0"; }

const char* roccg_last_error(void) { return last_error.c_str(); }

roccg_status roccg_run(const char* command, const char* config_json, int threads,
                       char** summary_json) {
  return Guard([&] {
    Require(command, "command");
    const json summary =
        roccg::pipeline::RunCommand(command, ParseConfig(config_json, "config"), threads);
    if (summary_json) {
      const std::string text = summary.dump(1);
      char* out = static_cast<char*>(std::malloc(text.size() + 1));
      if (!out) throw std::bad_alloc();
      std::memcpy(out, text.c_str(), text.size() + 1);
      *summary_json = out;
    }
  });
}

void roccg_string_free(char* s) { std::free(s); }

roccg_status roccg_instance_generate(const char* family, int n, uint64_t seed,
                                     roccg_instance** out) {
  return Guard([&] {
    Require(family, "family");
    Require(out, "out");
    *out = nullptr;
    roccg::problems::Instance inst;
    if (roccg::problems::ParseFamily(family) == roccg::problems::Family::kKnapsack) {
      inst = roccg::problems::GenerateKnapsack(n, roccg::problems::Correlation::kUncorrelated,
                                               seed);
    } else {
      inst = roccg::problems::GenerateCapitalBudgeting(n, seed);
    }
    *out = new roccg_instance{std::move(inst)};
  });
}

roccg_status roccg_instance_load(const char* path, roccg_instance** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    *out = new roccg_instance{roccg::problems::LoadInstance(path)};
  });
}

roccg_status roccg_instance_save(const roccg_instance* inst, const char* path) {
  return Guard([&] {
    Require(inst, "instance");
    Require(path, "path");
    roccg::problems::SaveInstance(inst->inst, path);
  });
}

void roccg_instance_free(roccg_instance* inst) { delete inst; }

int roccg_instance_size(const roccg_instance* inst) {
  return inst ? roccg::problems::NumItems(inst->inst) : -1;
}

roccg_status roccg_model_load(const char* path, roccg_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    *out = new roccg_model{roccg::neural::LoadModel(path)};
  });
}

void roccg_model_free(roccg_model* model) { delete model; }

roccg_status roccg_solve(const roccg_instance* inst, const roccg_model* model,
                         const char* method, const char* settings_json, roccg_solution** out) {
  return Guard([&] {
    Require(inst, "instance");
    Require(method, "method");
    Require(out, "out");
    *out = nullptr;
    const json doc = roccg::pipeline::SolveLoaded(
        inst->inst, model ? &model->model : nullptr, method,
        ParseConfig(settings_json, "settings"));
    auto sol = std::make_unique<roccg_solution>();
    sol->x = doc.at("x").get<std::vector<int>>();
    sol->objective = Number(doc.at("objective"));
    if (!doc.at("evaluated_objective").is_null()) {
      sol->evaluated = Number(doc.at("evaluated_objective"));
    }
    sol->iterations = doc.at("iterations").get<int>();
    sol->termination = doc.at("termination").get<std::string>();
    sol->json = doc.dump();
    *out = sol.release();
  });
}

void roccg_solution_free(roccg_solution* sol) { delete sol; }

roccg_status roccg_solution_x(const roccg_solution* sol, int* x, int len) {
  return Guard([&] {
    Require(sol, "solution");
    Require(x, "x");
    if (len != static_cast<int>(sol->x.size())) {
      throw roccg::UsageError("x buffer has length " + std::to_string(len) +
                              ", the solution has " + std::to_string(sol->x.size()));
    }
    std::copy(sol->x.begin(), sol->x.end(), x);
  });
}

int roccg_solution_size(const roccg_solution* sol) {
  return sol ? static_cast<int>(sol->x.size()) : -1;
}

double roccg_solution_objective(const roccg_solution* sol) {
  return sol ? sol->objective : std::numeric_limits<double>::quiet_NaN();
}

double roccg_solution_evaluated(const roccg_solution* sol) {
  return sol ? sol->evaluated : std::numeric_limits<double>::quiet_NaN();
}

int roccg_solution_iterations(const roccg_solution* sol) { return sol ? sol->iterations : -1; }

const char* roccg_solution_termination(const roccg_solution* sol) {
  return sol ? sol->termination.c_str() : "";
}

const char* roccg_solution_json(const roccg_solution* sol) {
  return sol ? sol->json.c_str() : "";
}

roccg_status roccg_evaluate(const roccg_instance* inst, const int* x, int len, double* value) {
  return Guard([&] {
    Require(inst, "instance");
    Require(value, "value");
    const auto* kp = std::get_if<roccg::problems::KnapsackInstance>(&inst->inst);
    if (!kp) {
      throw roccg::UsageError(
          "exact evaluation needs a knapsack instance; capital budgeting is scored over a "
          "scenario pool by the bench command");
    }
    if (len > 0) Require(x, "x");
    const roccg::problems::FirstStage first(x, x + std::max(len, 0));
    roccg::problems::CheckFirstStage(inst->inst, first);
    *value = roccg::eval::EvaluateExact(*kp, first).value;
  });
}

}  // extern "C"
