#include "eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "milp/branch_and_bound.hpp"
#include "problems/recourse.hpp"

namespace roccg::eval {

using milp::LinExpr;
using neural::TargetMode;
using problems::FirstStage;
using problems::Scenario;

namespace {

constexpr int kMaxCutRounds = 100000;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Adds α <= first + Σ (p̂ ξ - f) y - p̂ ξ r as a row over (α, ξ).
void AddRecourseCut(milp::MilpModel& lp, const problems::KnapsackInstance& kp,
                    double first, int alpha, const std::vector<int>& xi,
                    const problems::RecourseSolution& rec) {
  LinExpr row = LinExpr::Var(alpha);
  double rhs = first;
  for (int i = 0; i < kp.n(); ++i) {
    rhs -= kp.outsource[i] * rec.y[i];
    row.Add(xi[i], -kp.deviation[i] * (rec.y[i] - rec.r[i]));
  }
  lp.AddLessEqual(row, rhs);
}

}  // namespace

WorstCase EvaluateExact(const problems::KnapsackInstance& kp, const FirstStage& x,
                        double tol) {
  const problems::Instance inst = kp;
  problems::CheckFirstStage(inst, x);
  const int n = kp.n();
  const double first = problems::FirstStageCost(inst, x, Scenario(n, 0.0));

  milp::MilpModel lp;
  const int alpha = lp.AddContinuous(-milp::kInf, milp::kInf, "alpha");
  std::vector<int> xi(n);
  LinExpr budget;
  for (int i = 0; i < n; ++i) {
    xi[i] = lp.AddContinuous(0.0, 1.0, "xi" + std::to_string(i));
    budget.Add(xi[i], 1.0);
  }
  lp.AddLessEqual(budget, kp.budget, "budget");
  lp.SetObjective(LinExpr::Var(alpha), milp::ObjSense::kMaximize);

  Scenario point(n, 0.0);
  problems::RecourseSolution rec =
      problems::SolveSecondStage(inst, x, point, TargetMode::kSecondOnly);
  WorstCase out;
  out.value = rec.value + first;
  out.scenario = point;
  milp::SolveConfig config;
  config.gap_tol = 1e-12;
  for (int round = 1; round <= kMaxCutRounds; ++round) {
    AddRecourseCut(lp, kp, first, alpha, xi, rec);
    const milp::SolveResult res = milp::SolveMilp(lp, config);
    if (res.status != milp::SolveStatus::kOptimal) {
      throw SolverError("worst-case evaluation LP ended with status " +
                        std::string(milp::ToString(res.status)));
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      point[i] = std::clamp(res.values[xi[i]], 0.0, 1.0);
      sum += point[i];
    }
    if (sum > kp.budget) {
      for (double& v : point) v *= kp.budget / sum;
    }
    rec = problems::SolveSecondStage(inst, x, point, TargetMode::kSecondOnly);
    const double value = rec.value + first;
    if (value > out.value) {
      out.value = value;
      out.scenario = point;
    }
    out.rounds = round;
    if (value >= res.objective - tol) return out;
  }
  throw SolverError("worst-case evaluation did not converge");
}

WorstCase EvaluateSampled(const problems::Instance& inst, const FirstStage& x,
                          std::span<const Scenario> pool, std::optional<double> cutoff) {
  if (pool.empty()) throw UsageError("sampled evaluation needs a nonempty pool");
  WorstCase out;
  out.value = -kInfinity;
  for (const Scenario& xi : pool) {
    const std::optional<double> v =
        problems::SecondStageValue(inst, x, xi, TargetMode::kSum);
    const double value = v ? *v : kInfinity;
    if (value > out.value) {
      out.value = value;
      out.scenario = xi;
    }
    ++out.rounds;
    if (cutoff && out.value >= *cutoff) break;
  }
  return out;
}

double EvaluateFirstStage(const problems::Instance& inst, const FirstStage& x,
                          std::span<const Scenario> pool) {
  if (const auto* kp = std::get_if<problems::KnapsackInstance>(&inst)) {
    return EvaluateExact(*kp, x).value;
  }
  return EvaluateSampled(inst, x, pool).value;
}

RelativeError ComputeRelativeError(double best, double obj) {
  if (best == 0.0) return {std::abs(obj), obj != 0.0};
  return {100.0 * std::abs(best - obj) / std::abs(best), false};
}

BruteForceResult BruteForce2ro(const problems::Instance& inst,
                               std::span<const Scenario> pool) {
  const int n = problems::NumItems(inst);
  if (n > kBruteForceLimit) {
    throw UsageError("brute force is limited to n <= " + std::to_string(kBruteForceLimit) +
                     ", instance has n = " + std::to_string(n));
  }
  const auto* cb = std::get_if<problems::CapitalBudgetingInstance>(&inst);
  if (cb && pool.empty()) {
    throw UsageError("brute force on capital budgeting needs a scenario pool");
  }
  BruteForceResult best;
  best.value = kInfinity;
  for (long mask = 0; mask < (1L << n); ++mask) {
    FirstStage x(n);
    for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1;
    double value;
    if (cb) {
      if (problems::CbFeasibilityScenario(*cb, x)) continue;
      value = EvaluateSampled(inst, x, pool, best.value).value;
    } else {
      value = EvaluateExact(std::get<problems::KnapsackInstance>(inst), x).value;
    }
    if (value < best.value) {
      best.value = value;
      best.x = x;
    }
  }
  return best;
}

}  // namespace roccg::eval
