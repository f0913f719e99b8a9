#include <algorithm>
#include <chrono>

#include "ccg/ccg.hpp"
#include "ccg/internal.hpp"
#include "common/error.hpp"
#include "common/random.hpp"
#include "datagen/sampling.hpp"
#include "embed/embed.hpp"
#include "milp/branch_and_bound.hpp"
#include "problems/recourse.hpp"

namespace roccg::ccg {

using milp::LinExpr;
using problems::CapitalBudgetingInstance;
using problems::KnapsackInstance;

namespace {

// Clips to the box and rescales onto the budget if needed.
Scenario Project(const problems::Instance& inst, Scenario xi) {
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    double sum = 0.0;
    for (double& v : xi) sum += (v = std::clamp(v, 0.0, 1.0));
    if (sum > kp->budget) {
      for (double& v : xi) v *= sum > 0.0 ? kp->budget / sum : 0.0;
    }
    return xi;
  }
  for (double& v : xi) v = std::clamp(v, -1.0, 1.0);
  return xi;
}

AdversarialResult Sample(const problems::Instance& inst, const neural::ValueModel& vm,
                         const FirstStage& x, const AdversarialConfig& config) {
  const std::vector<double> ex = vm.EmbedX(problems::FirstStageFeatures(inst, x));
  Rng rng(config.seed);
  AdversarialResult out;
  out.value = -milp::kInf;
  for (int s = 0; s < config.samples; ++s) {
    Scenario xi = datagen::SampleScenario(inst, rng);
    const double v = PredictedScore(inst, vm, x, ex, xi,
                                    vm.EmbedXi(problems::ScenarioFeatures(inst, xi)));
    if (v > out.value) {
      out.value = v;
      out.scenario = std::move(xi);
    }
  }
  return out;
}

AdversarialResult Optimize(const problems::Instance& inst, const neural::ValueModel& vm,
                           const FirstStage& x, const AdversarialConfig& config,
                           bool relax) {
  milp::MilpModel m;
  const int dim = problems::ScenarioDim(inst);
  std::vector<int> xi(dim);
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    LinExpr budget;
    for (int i = 0; i < dim; ++i) {
      xi[i] = m.AddContinuous(0.0, 1.0, "xi" + std::to_string(i));
      budget.Add(xi[i], 1.0);
    }
    m.AddLessEqual(budget, kp->budget, "budget");
  } else {
    for (int k = 0; k < dim; ++k) {
      xi[k] = m.AddContinuous(-1.0, 1.0, "xi" + std::to_string(k));
    }
  }
  const std::vector<double> ex = vm.EmbedX(problems::FirstStageFeatures(inst, x));
  const embed::EmbeddedEncoder exi = embed::EmbedEncoder(
      m, vm.xi_encoder, vm.xi_scaler, problems::ScenarioFeatureExprs(inst, xi), "exi", relax);
  const embed::EmbeddedValue v =
      embed::EmbedValueNetwork(m, vm, embed::ConstantEncoder(ex), exi, "v", relax);
  LinExpr obj = LinExpr::Var(v.output);
  if (vm.target_mode == neural::TargetMode::kSecondOnly) {
    if (const auto* cb = std::get_if<CapitalBudgetingInstance>(&inst)) {
      // -Σ x_i r̄_i (1 + Ψ_i ξ / 2) / range
      const double scale = 1.0 / vm.label_scaler.range();
      for (int i = 0; i < cb->n(); ++i) {
        if (!x[i]) continue;
        obj.AddConstant(-cb->revenue[i] * scale);
        for (int k = 0; k < dim; ++k) {
          obj.Add(xi[k], -cb->revenue[i] * cb->psi[i * dim + k] / 2.0 * scale);
        }
      }
    } else {
      obj.AddConstant(problems::FirstStageCost(inst, x, Scenario(dim, 0.0)) /
                      vm.label_scaler.range());
    }
  }
  obj.Normalize();
  m.SetObjective(obj, milp::ObjSense::kMaximize);
  milp::SolveConfig solve = config.solve;
  solve.gap_tol = std::min(solve.gap_tol, 1e-9);
  const milp::SolveResult res = milp::SolveMilp(m, solve);
  AdversarialResult out;
  out.status = res.status;
  out.wall_seconds = res.wall_seconds;
  if (!res.has_solution()) {
    throw SolverError("adversarial problem ended with status " +
                      std::string(milp::ToString(res.status)));
  }
  out.proven = res.status == milp::SolveStatus::kOptimal;
  Scenario point(dim);
  for (int k = 0; k < dim; ++k) point[k] = res.values[xi[k]];
  out.scenario = Project(inst, std::move(point));
  out.value = PredictedScore(inst, vm, x, ex, out.scenario,
                             vm.EmbedXi(problems::ScenarioFeatures(inst, out.scenario)));
  return out;
}

}  // namespace

AdversarialResult SolveAdversarial(const problems::Instance& inst,
                                   const neural::ValueModel& model, const FirstStage& x,
                                   const AdversarialConfig& config) {
  CheckModelFor(inst, model);
  problems::CheckFirstStage(inst, x);
  const auto start = std::chrono::steady_clock::now();
  AdversarialResult out;
  switch (config.mode) {
    case ApMode::kSampling:
      if (config.samples < 1) throw UsageError("sampling mode needs at least one sample");
      out = Sample(inst, model, x, config);
      break;
    case ApMode::kMilp:
      out = Optimize(inst, model, x, config, false);
      break;
    case ApMode::kLpRelax:
      out = Optimize(inst, model, x, config, true);
      out.proven = false;
      break;
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace roccg::ccg
