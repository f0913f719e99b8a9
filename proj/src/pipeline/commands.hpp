#ifndef ROCCG_PIPELINE_COMMANDS_HPP_
#define ROCCG_PIPELINE_COMMANDS_HPP_

#include <string>

#include "json.hpp"
#include "neural/network.hpp"
#include "problems/instance.hpp"

namespace roccg::pipeline {

inline constexpr int kRunConfigSchemaVersion = 1;

// Every command takes a flat JSON config, fills in defaults, rejects unknown
// keys with a UsageError and writes the resolved config as run_config.json
// next to its artifacts. The returned document summarizes the run for the
// caller.
//
// gen:   family, count, n_min, n_max, seed, out
// data:  family, instances, decisions, scenarios, n_min, n_max, target_mode,
//        seed, out
// train: dataset, profile, epochs, batch_size, learning_rate,
//        validation_interval, validation_fraction, seed, out
// solve: instance, method, model, out and the solver keys below
// bench: instances, methods, model, dataset, eval_samples, out and the
//        solver keys below
//
// Solver keys: epsilon, max_iterations, mp_mode, ap_mode, samples,
// time_limit_seconds, milp_time_limit_seconds, eval_samples, seed,
// record_timing.
nlohmann::json RunGen(const nlohmann::json& config);
nlohmann::json RunData(const nlohmann::json& config, int threads = 1);
nlohmann::json RunTrain(const nlohmann::json& config);
nlohmann::json RunSolve(const nlohmann::json& config);
nlohmann::json RunBench(const nlohmann::json& config, int threads = 1);

// Solves an instance already in memory and returns the solution document of
// the solve command. `settings` may hold only the solver keys; `model` is
// required for ml-ccg. The iteration log goes to `log` as JSON lines.
nlohmann::json SolveLoaded(const problems::Instance& inst, const neural::ValueModel* model,
                           const std::string& method, const nlohmann::json& settings,
                           std::string* log = nullptr);

// Dispatches on a command name.
nlohmann::json RunCommand(const std::string& command, const nlohmann::json& config,
                          int threads = 1);

}  // namespace roccg::pipeline

#endif  // ROCCG_PIPELINE_COMMANDS_HPP_
