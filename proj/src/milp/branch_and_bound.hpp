#ifndef ROCCG_MILP_BRANCH_AND_BOUND_HPP_
#define ROCCG_MILP_BRANCH_AND_BOUND_HPP_

#include "milp/model.hpp"
#include "milp/solve_types.hpp"

namespace roccg::milp {

// LP-based branch-and-bound: most-fractional branching, best-bound node
// selection with plunging into the child on the rounding side. Children are
// warm-started from the parent basis. Single-threaded and deterministic.
SolveResult SolveMilp(const MilpModel& model, const SolveConfig& config = {});

}  // namespace roccg::milp

#endif  // ROCCG_MILP_BRANCH_AND_BOUND_HPP_
