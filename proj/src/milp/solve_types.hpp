#ifndef ROCCG_MILP_SOLVE_TYPES_HPP_
#define ROCCG_MILP_SOLVE_TYPES_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace roccg::milp {

enum class SolveStatus {
  kOptimal,
  kFeasible,           // a limit was hit; incumbent and bound are valid
  kInfeasible,
  kUnbounded,
  kLimitNoIncumbent,   // a limit was hit before any incumbent was found
  kNumericallyUnstable,
  kCutoff,             // no solution strictly better than the cutoff exists
};

std::string_view ToString(SolveStatus status);

struct SolveConfig {
  double time_limit_seconds = 3600.0;
  // Stop once the incumbent has not improved for this long.
  double no_improvement_timeout_seconds = 180.0;
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  // Relative gap: stop when incumbent - bound <= gap_tol * max(1, |incumbent|).
  double gap_tol = 1e-6;
  std::int64_t node_limit = 5'000'000;
  // Objective value (in the model's sense) that solutions must strictly beat.
  std::optional<double> cutoff;
  // Called at a node whose LP point has every variable of positive branch
  // priority integral. Must return an optimal full assignment with those
  // variables fixed to the given (rounded) values, or nullopt when no
  // feasible completion exists; the node is then closed without branching.
  std::function<std::optional<std::vector<double>>(std::span<const double>)> leaf_oracle;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> values;  // one entry per model variable
  double objective = 0.0;      // in the model's objective sense
  double best_bound = 0.0;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double wall_seconds = 0.0;
  // For kUnbounded: an improving direction in structural space.
  std::vector<double> ray;

  bool has_solution() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible;
  }
};

}  // namespace roccg::milp

#endif  // ROCCG_MILP_SOLVE_TYPES_HPP_
