#ifndef ROCCG_EVAL_EVALUATE_HPP_
#define ROCCG_EVAL_EVALUATE_HPP_

#include <optional>
#include <span>
#include <vector>

#include "problems/instance.hpp"

namespace roccg::eval {

struct WorstCase {
  double value = 0.0;
  problems::Scenario scenario;
  int rounds = 0;  // cut rounds for the exact knapsack evaluator
};

// Exact worst case of x over the budgeted set by constraint generation:
// max α s.t. α <= value(ξ; y, r) for every recourse collected so far, then
// the exact recourse at the LP maximizer is added until it no longer cuts
// off (α, ξ) by more than `tol`.
WorstCase EvaluateExact(const problems::KnapsackInstance& inst,
                        const problems::FirstStage& x, double tol = 1e-7);

// Worst case over a finite pool; an infeasible pair scores +infinity. When
// `cutoff` is given the scan may stop early once the running maximum reaches
// it (the returned value is then a lower bound that is >= cutoff).
WorstCase EvaluateSampled(const problems::Instance& inst,
                          const problems::FirstStage& x,
                          std::span<const problems::Scenario> pool,
                          std::optional<double> cutoff = std::nullopt);

// Exact for knapsack; capital budgeting uses the sampled evaluator over `pool`.
double EvaluateFirstStage(const problems::Instance& inst, const problems::FirstStage& x,
                          std::span<const problems::Scenario> pool = {});

struct RelativeError {
  double pct = 0.0;
  bool absolute = false;  // best objective was 0; pct holds |obj|
};

// 100 |best - obj| / |best|; falls back to |best - obj| when best is 0.
RelativeError ComputeRelativeError(double best, double obj);

inline constexpr int kBruteForceLimit = 12;

struct BruteForceResult {
  problems::FirstStage x;
  double value = 0.0;
};

// Enumerates every first stage. Knapsack uses the exact evaluator; capital
// budgeting skips x whose worst-case cost exceeds B and evaluates the rest
// over `pool`. Throws UsageError when n exceeds kBruteForceLimit or the pool
// is missing for capital budgeting.
BruteForceResult BruteForce2ro(const problems::Instance& inst,
                               std::span<const problems::Scenario> pool = {});

}  // namespace roccg::eval

#endif  // ROCCG_EVAL_EVALUATE_HPP_
