#include <algorithm>
#include <cmath>

#include "ccg/ccg.hpp"
#include "ccg/internal.hpp"
#include "common/error.hpp"
#include "embed/embed.hpp"
#include "milp/branch_and_bound.hpp"
#include "problems/recourse.hpp"

namespace roccg::ccg {

using milp::LinExpr;
using milp::MilpModel;
using problems::CapitalBudgetingInstance;
using problems::KnapsackInstance;

void CheckModelFor(const problems::Instance& inst, const neural::ValueModel& model) {
  model.CheckReady();
  const problems::Family family = problems::FamilyOf(inst);
  if (model.family != problems::ToString(family)) {
    throw UsageError("value model was trained for '" + model.family +
                     "', instance is '" + std::string(problems::ToString(family)) + "'");
  }
  if (model.x_feature_width() != problems::FirstStageFeatureWidth(family) ||
      model.xi_feature_width() != problems::ScenarioFeatureWidth(family)) {
    throw InputError("value model feature widths do not match the problem family");
  }
}

LinExpr FirstStageExpr(const problems::Instance& inst, std::span<const int> x,
                       const Scenario& xi) {
  LinExpr e;
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    for (int i = 0; i < kp->n(); ++i) e.Add(x[i], kp->outsource[i] - kp->profit[i]);
  } else {
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    for (int i = 0; i < cb.n(); ++i) e.Add(x[i], -cb.Revenue(i, xi));
  }
  return e;
}

namespace {

struct PredictionBlock {
  MilpModel model;
  std::vector<int> x;
  std::vector<LinExpr> preds;
  double lower = 0.0;
  double upper = 0.0;
};

PredictionBlock BuildPredictions(const problems::Instance& inst,
                                 const neural::ValueModel& vm, const ScenarioPool& pool) {
  CheckModelFor(inst, vm);
  if (pool.empty()) throw UsageError("the main problem needs a nonempty scenario pool");
  if (pool.embeddings().size() != pool.scenarios().size()) {
    throw UsageError("scenario pool has no embeddings for this model");
  }
  PredictionBlock b;
  const int n = problems::NumItems(inst);
  for (int i = 0; i < n; ++i) b.x.push_back(b.model.AddBinary("x" + std::to_string(i)));
  const neural::Matrix f0 = problems::FirstStageFeatures(inst, FirstStage(n, 0));
  const neural::Matrix f1 = problems::FirstStageFeatures(inst, FirstStage(n, 1));
  const embed::EmbeddedEncoder ex = embed::EmbedBinaryXEncoder(b.model, vm, b.x, f0, f1, "ex");
  b.lower = milp::kInf;
  b.upper = -milp::kInf;
  for (int j = 0; j < pool.size(); ++j) {
    const embed::EmbeddedValue v = embed::EmbedValueNetwork(
        b.model, vm, ex, embed::ConstantEncoder(pool.embeddings()[j]), "v" + std::to_string(j));
    LinExpr pred = LinExpr::Var(v.output);
    if (vm.target_mode == neural::TargetMode::kSecondOnly) {
      pred.AddScaled(FirstStageExpr(inst, b.x, pool.scenarios()[j]),
                     1.0 / vm.label_scaler.range());
    }
    pred.Normalize();
    const embed::Interval r = embed::ExprRange(b.model, pred);
    b.lower = std::min(b.lower, r.lo);
    b.upper = std::max(b.upper, r.hi);
    b.preds.push_back(std::move(pred));
  }
  if (const auto* cb = std::get_if<CapitalBudgetingInstance>(&inst)) {
    const double tol = problems::BudgetSlackTol(*cb);
    for (int j = 0; j < pool.size(); ++j) {
      LinExpr cut;
      for (int i = 0; i < n; ++i) cut.Add(b.x[i], cb->Cost(i, pool.scenarios()[j]));
      b.model.AddLessEqual(cut, cb->budget + tol, "feas" + std::to_string(j));
    }
  }
  return b;
}

MainResult Finish(const MilpModel& model, const milp::SolveResult& res,
                  const std::vector<int>& x) {
  MainResult out;
  out.status = res.status;
  out.binaries = model.CountIntegerVariables();
  out.wall_seconds = res.wall_seconds;
  if (!res.has_solution()) return out;
  for (int v : x) out.x.push_back(res.values[v] > 0.5 ? 1 : 0);
  out.objective = res.objective;
  return out;
}

}  // namespace

MainResult SolveMainArgmax(const problems::Instance& inst, const neural::ValueModel& vm,
                           const ScenarioPool& pool, const milp::SolveConfig& config) {
  PredictionBlock b = BuildPredictions(inst, vm, pool);
  MilpModel& m = b.model;
  const int n = problems::NumItems(inst);
  const int k = pool.size();
  const embed::ArgmaxGadget g =
      embed::EmbedArgmax(m, b.preds, pool.scenarios(), b.lower, b.upper, "sel");

  // One second-stage block shared by all scenarios; only the selected
  // scenario's objective and constraints bind.
  std::vector<int> y(n), r;
  for (int i = 0; i < n; ++i) y[i] = m.AddBinary("y" + std::to_string(i));
  std::vector<LinExpr> objs(k);
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    r.resize(n);
    LinExpr cap;
    for (int i = 0; i < n; ++i) {
      r[i] = m.AddBinary("r" + std::to_string(i));
      m.AddLessEqual(LinExpr::Var(y[i]).Add(b.x[i], -1.0), 0.0);
      m.AddLessEqual(LinExpr::Var(r[i]).Add(y[i], -1.0), 0.0);
      cap.Add(y[i], kp->weight[i]).Add(r[i], kp->repair[i]);
    }
    m.AddLessEqual(cap, kp->capacity, "capacity");
    for (int j = 0; j < k; ++j) {
      const Scenario& xi = pool.scenarios()[j];
      objs[j] = FirstStageExpr(inst, b.x, xi);
      for (int i = 0; i < n; ++i) {
        objs[j].Add(y[i], kp->deviation[i] * xi[i] - kp->outsource[i]);
        objs[j].Add(r[i], -kp->deviation[i] * xi[i]);
      }
    }
  } else {
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    const double tol = problems::BudgetSlackTol(cb);
    for (int i = 0; i < n; ++i) {
      m.AddLessEqual(LinExpr::Var(y[i]).Add(b.x[i], 1.0), 1.0);
    }
    for (int j = 0; j < k; ++j) {
      const Scenario& xi = pool.scenarios()[j];
      objs[j] = FirstStageExpr(inst, b.x, xi);
      LinExpr budget;
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        objs[j].Add(y[i], -cb.eta * cb.Revenue(i, xi));
        budget.Add(b.x[i], cb.Cost(i, xi)).Add(y[i], cb.Cost(i, xi));
        total += cb.Cost(i, xi);
      }
      const double big_m = std::max(0.0, total - cb.budget);
      if (big_m > 0.0) {
        budget.Add(g.z[j], big_m);
        m.AddLessEqual(budget, cb.budget + big_m + tol, "budget" + std::to_string(j));
      }
    }
  }
  double theta_lo = milp::kInf, theta_hi = -milp::kInf;
  std::vector<embed::Interval> ranges;
  for (LinExpr& o : objs) {
    o.Normalize();
    ranges.push_back(embed::ExprRange(m, o));
    theta_lo = std::min(theta_lo, ranges.back().lo);
    theta_hi = std::max(theta_hi, ranges.back().hi);
  }
  const int theta = m.AddContinuous(theta_lo, theta_hi, "theta");
  for (int j = 0; j < k; ++j) {
    // θ >= obj_j - M_j (1 - z_j)
    const double big_m = ranges[j].hi - theta_lo;
    LinExpr row = LinExpr::Var(theta);
    row.AddScaled(objs[j], -1.0);
    row.Add(g.z[j], -big_m);
    m.AddGreaterEqual(row, -big_m, "epi" + std::to_string(j));
  }
  m.SetObjective(LinExpr::Var(theta), milp::ObjSense::kMinimize);
  const milp::SolveResult res = milp::SolveMilp(m, config);
  MainResult out = Finish(m, res, b.x);
  if (res.has_solution()) {
    double best = -1.0;
    for (int j = 0; j < k; ++j) {
      if (res.values[g.z[j]] > best) {
        best = res.values[g.z[j]];
        out.selected = j;
      }
    }
  }
  return out;
}

MainResult SolveMainMax(const problems::Instance& inst, const neural::ValueModel& vm,
                        const ScenarioPool& pool, const milp::SolveConfig& config) {
  PredictionBlock b = BuildPredictions(inst, vm, pool);
  MilpModel& m = b.model;
  const int alpha = m.AddContinuous(b.lower, b.upper, "alpha");
  for (size_t j = 0; j < b.preds.size(); ++j) {
    LinExpr row = LinExpr::Var(alpha);
    row.AddScaled(b.preds[j], -1.0);
    m.AddGreaterEqual(row, 0.0, "max" + std::to_string(j));
  }
  m.SetObjective(LinExpr::Var(alpha), milp::ObjSense::kMinimize);
  const milp::SolveResult res = milp::SolveMilp(m, config);
  MainResult out = Finish(m, res, b.x);
  if (res.has_solution()) out.objective = vm.label_scaler.Unscale(res.objective);
  return out;
}

}  // namespace roccg::ccg
