#ifndef ROCCG_PROBLEMS_RECOURSE_HPP_
#define ROCCG_PROBLEMS_RECOURSE_HPP_

#include <optional>
#include <span>

#include "embed/embed.hpp"
#include "milp/model.hpp"
#include "neural/network.hpp"
#include "problems/instance.hpp"

namespace roccg::problems {

// All values use the internal minimization convention: capital budgeting
// objectives are negated revenues.

// Relative slack on the capital-budgeting budget row.
inline constexpr double kBudgetTol = 1e-9;

double BudgetSlackTol(const CapitalBudgetingInstance& inst);

// Knapsack: sum (f - p̄) x, independent of ξ. Capital budgeting: -r(ξ)'x.
double FirstStageCost(const Instance& inst, const FirstStage& x, const Scenario& xi);

struct RecourseSolution {
  bool feasible = false;
  double value = 0.0;      // includes the first-stage term in sum mode
  std::vector<int> y;
  std::vector<int> r;      // knapsack repair decisions; empty otherwise
};

// Exact inner problem. Knapsack uses a dynamic program over the integer
// capacity (falling back to branch-and-bound for fractional data); capital
// budgeting is a 0-1 knapsack over the unselected projects solved by depth-
// first branch-and-bound. Capital budgeting is infeasible iff c(ξ)'x > B.
RecourseSolution SolveSecondStage(const Instance& inst, const FirstStage& x,
                                  const Scenario& xi, neural::TargetMode mode);

// nullopt marks an infeasible pair.
std::optional<double> SecondStageValue(const Instance& inst, const FirstStage& x,
                                       const Scenario& xi, neural::TargetMode mode);

// The inner problem as a generic MILP, for cross-checks.
milp::MilpModel SecondStageModel(const Instance& inst, const FirstStage& x,
                                 const Scenario& xi, neural::TargetMode mode);

// max over the box of c(ξ)'x, in closed form.
double CbMaxCost(const CapitalBudgetingInstance& inst, const FirstStage& x);
// The cost-maximizing scenario when it breaks the budget, nullopt otherwise.
std::optional<Scenario> CbFeasibilityScenario(const CapitalBudgetingInstance& inst,
                                              const FirstStage& x);

int FirstStageFeatureWidth(Family family);
int ScenarioFeatureWidth(Family family);

// Per-element features. Knapsack rows are (x_i | ξ_i, f, p̄, p̂, f - p̄, c, t, C);
// capital budgeting rows are (x_i, r̄, c̄) and (1 + Φ_i ξ/2, 1 + Ψ_i ξ/2, r̄, c̄).
neural::Matrix FirstStageFeatures(const Instance& inst, const FirstStage& x);
neural::Matrix ScenarioFeatures(const Instance& inst, const Scenario& xi);

// Scenario features as affine expressions of the scenario variables.
embed::FeatureExprs ScenarioFeatureExprs(const Instance& inst,
                                         std::span<const int> xi_vars);

}  // namespace roccg::problems

#endif  // ROCCG_PROBLEMS_RECOURSE_HPP_
