#include "problems/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "milp/branch_and_bound.hpp"

namespace roccg::problems {

using milp::LinExpr;
using milp::MilpModel;
using neural::TargetMode;

namespace {

constexpr int kKnapsackFeatures = 8;

bool IsIntegral(double v) { return std::abs(v - std::round(v)) <= 1e-9; }

// Capacity * items above which the knapsack dynamic program is not used.
constexpr double kMaxDpCells = 5e7;

bool DpApplicable(const KnapsackInstance& kp) {
  if (kp.capacity * kp.n() > kMaxDpCells) return false;
  for (int i = 0; i < kp.n(); ++i) {
    if (!IsIntegral(kp.weight[i]) || !IsIntegral(kp.repair[i])) return false;
  }
  return true;
}

RecourseSolution KnapsackDp(const KnapsackInstance& kp, const FirstStage& x,
                            const Scenario& xi) {
  const int n = kp.n();
  const int cap = static_cast<int>(std::floor(kp.capacity + 1e-9));
  std::vector<double> best(cap + 1, 0.0), next(cap + 1);
  std::vector<std::vector<unsigned char>> choice(n);
  for (int i = 0; i < n; ++i) {
    if (!x[i]) continue;
    const int w1 = static_cast<int>(std::lround(kp.weight[i]));
    const int w2 = w1 + static_cast<int>(std::lround(kp.repair[i]));
    const double v1 = kp.deviation[i] * xi[i] - kp.outsource[i];
    const double v2 = -kp.outsource[i];
    choice[i].assign(cap + 1, 0);
    for (int w = 0; w <= cap; ++w) {
      double v = best[w];
      unsigned char ch = 0;
      if (w >= w1 && best[w - w1] + v1 < v) {
        v = best[w - w1] + v1;
        ch = 1;
      }
      if (w >= w2 && best[w - w2] + v2 < v) {
        v = best[w - w2] + v2;
        ch = 2;
      }
      next[w] = v;
      choice[i][w] = ch;
    }
    best.swap(next);
  }
  RecourseSolution sol;
  sol.feasible = true;
  sol.y.assign(n, 0);
  sol.r.assign(n, 0);
  int w = cap;
  for (int i = n - 1; i >= 0; --i) {
    if (!x[i]) continue;
    const unsigned char ch = choice[i][w];
    if (ch >= 1) {
      sol.y[i] = 1;
      w -= static_cast<int>(std::lround(kp.weight[i]));
    }
    if (ch == 2) {
      sol.r[i] = 1;
      w -= static_cast<int>(std::lround(kp.repair[i]));
    }
  }
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    value += (kp.deviation[i] * xi[i] - kp.outsource[i]) * sol.y[i] -
             kp.deviation[i] * xi[i] * sol.r[i];
  }
  sol.value = value;
  return sol;
}

RecourseSolution SolveByMilp(const Instance& inst, const FirstStage& x,
                             const Scenario& xi) {
  MilpModel model = SecondStageModel(inst, x, xi, TargetMode::kSecondOnly);
  milp::SolveConfig config;
  config.gap_tol = 1e-9;
  const milp::SolveResult res = milp::SolveMilp(model, config);
  RecourseSolution sol;
  if (res.status == milp::SolveStatus::kInfeasible) return sol;
  if (res.status != milp::SolveStatus::kOptimal) {
    throw SolverError("second-stage solve ended with status " +
                      std::string(milp::ToString(res.status)));
  }
  const int n = NumItems(inst);
  sol.feasible = true;
  sol.value = res.objective;
  for (int i = 0; i < n; ++i) sol.y.push_back(static_cast<int>(std::lround(res.values[i])));
  if (FamilyOf(inst) == Family::kKnapsack) {
    for (int i = 0; i < n; ++i) {
      sol.r.push_back(static_cast<int>(std::lround(res.values[n + i])));
    }
  }
  return sol;
}

// Depth-first 0-1 knapsack maximizing profit with the fractional bound.
class BinaryKnapsack {
 public:
  BinaryKnapsack(std::vector<int> items, std::vector<double> weight,
                 std::vector<double> profit, double capacity)
      : items_(std::move(items)), w_(std::move(weight)), p_(std::move(profit)),
        capacity_(capacity) {
    std::stable_sort(items_.begin(), items_.end(), [&](int a, int b) {
      return p_[a] * w_[b] > p_[b] * w_[a];
    });
    take_.assign(items_.size(), 0);
    best_take_ = take_;
  }

  std::vector<int> Solve() {
    Search(0, 0.0, 0.0);
    std::vector<int> chosen;
    for (size_t k = 0; k < items_.size(); ++k) {
      if (best_take_[k]) chosen.push_back(items_[k]);
    }
    return chosen;
  }

 private:
  double Bound(size_t k, double weight, double profit) const {
    for (; k < items_.size(); ++k) {
      const int j = items_[k];
      if (weight + w_[j] <= capacity_) {
        weight += w_[j];
        profit += p_[j];
      } else {
        return profit + p_[j] * (capacity_ - weight) / w_[j];
      }
    }
    return profit;
  }

  void Search(size_t k, double weight, double profit) {
    if (profit > best_) {
      best_ = profit;
      best_take_ = take_;
    }
    if (k == items_.size()) return;
    if (Bound(k, weight, profit) <= best_ + 1e-12) return;
    const int j = items_[k];
    if (weight + w_[j] <= capacity_) {
      take_[k] = 1;
      Search(k + 1, weight + w_[j], profit + p_[j]);
      take_[k] = 0;
    }
    Search(k + 1, weight, profit);
  }

  std::vector<int> items_;
  std::vector<double> w_;
  std::vector<double> p_;
  double capacity_;
  std::vector<char> take_;
  std::vector<char> best_take_;
  double best_ = 0.0;
};

RecourseSolution CapitalBudgetingRecourse(const CapitalBudgetingInstance& cb,
                                          const FirstStage& x, const Scenario& xi) {
  const int n = cb.n();
  double used = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x[i]) used += cb.Cost(i, xi);
  }
  RecourseSolution sol;
  const double remaining = cb.budget - used;
  const double tol = BudgetSlackTol(cb);
  if (remaining < -tol) return sol;
  std::vector<int> items;
  std::vector<double> weight(n), profit(n);
  for (int i = 0; i < n; ++i) {
    weight[i] = cb.Cost(i, xi);
    profit[i] = cb.eta * cb.Revenue(i, xi);
    if (!x[i] && profit[i] > 0.0) items.push_back(i);
  }
  BinaryKnapsack knap(items, weight, profit, std::max(remaining, 0.0) + tol);
  sol.feasible = true;
  sol.y.assign(n, 0);
  double value = 0.0;
  for (int j : knap.Solve()) {
    sol.y[j] = 1;
    value -= profit[j];
  }
  sol.value = value;
  return sol;
}

void CheckScenario(const Instance& inst, const Scenario& xi) {
  if (static_cast<int>(xi.size()) != ScenarioDim(inst)) {
    throw InputError("scenario has length " + std::to_string(xi.size()) +
                     ", expected " + std::to_string(ScenarioDim(inst)));
  }
}

}  // namespace

double BudgetSlackTol(const CapitalBudgetingInstance& inst) {
  return kBudgetTol * std::max(1.0, inst.budget);
}

double FirstStageCost(const Instance& inst, const FirstStage& x, const Scenario& xi) {
  double v = 0.0;
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    for (int i = 0; i < kp->n(); ++i) {
      if (x[i]) v += kp->outsource[i] - kp->profit[i];
    }
    return v;
  }
  const auto& cb = std::get<CapitalBudgetingInstance>(inst);
  for (int i = 0; i < cb.n(); ++i) {
    if (x[i]) v -= cb.Revenue(i, xi);
  }
  return v;
}

RecourseSolution SolveSecondStage(const Instance& inst, const FirstStage& x,
                                  const Scenario& xi, TargetMode mode) {
  CheckFirstStage(inst, x);
  CheckScenario(inst, xi);
  RecourseSolution sol;
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    sol = DpApplicable(*kp) ? KnapsackDp(*kp, x, xi) : SolveByMilp(inst, x, xi);
  } else {
    sol = CapitalBudgetingRecourse(std::get<CapitalBudgetingInstance>(inst), x, xi);
  }
  if (sol.feasible && mode == TargetMode::kSum) sol.value += FirstStageCost(inst, x, xi);
  return sol;
}

std::optional<double> SecondStageValue(const Instance& inst, const FirstStage& x,
                                       const Scenario& xi, TargetMode mode) {
  RecourseSolution sol = SolveSecondStage(inst, x, xi, mode);
  if (!sol.feasible) return std::nullopt;
  return sol.value;
}

MilpModel SecondStageModel(const Instance& inst, const FirstStage& x,
                           const Scenario& xi, TargetMode mode) {
  CheckFirstStage(inst, x);
  CheckScenario(inst, xi);
  MilpModel model;
  const int n = NumItems(inst);
  LinExpr obj(mode == TargetMode::kSum ? FirstStageCost(inst, x, xi) : 0.0);
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    std::vector<int> y(n), r(n);
    for (int i = 0; i < n; ++i) {
      y[i] = model.AddVariable(0, x[i], milp::VarType::kBinary, "y" + std::to_string(i));
    }
    for (int i = 0; i < n; ++i) {
      r[i] = model.AddVariable(0, x[i], milp::VarType::kBinary, "r" + std::to_string(i));
    }
    LinExpr cap;
    for (int i = 0; i < n; ++i) {
      model.AddLessEqual(LinExpr::Var(r[i]).Add(y[i], -1.0), 0.0);
      cap.Add(y[i], kp->weight[i]).Add(r[i], kp->repair[i]);
      obj.Add(y[i], kp->deviation[i] * xi[i] - kp->outsource[i]);
      obj.Add(r[i], -kp->deviation[i] * xi[i]);
    }
    model.AddLessEqual(cap, kp->capacity, "capacity");
  } else {
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    LinExpr budget;
    double used = 0.0;
    for (int i = 0; i < n; ++i) {
      const int y = model.AddVariable(0, 1 - x[i], milp::VarType::kBinary,
                                      "y" + std::to_string(i));
      budget.Add(y, cb.Cost(i, xi));
      obj.Add(y, -cb.eta * cb.Revenue(i, xi));
      if (x[i]) used += cb.Cost(i, xi);
    }
    model.AddLessEqual(budget, cb.budget - used + BudgetSlackTol(cb), "budget");
  }
  model.SetObjective(obj, milp::ObjSense::kMinimize);
  return model;
}

double CbMaxCost(const CapitalBudgetingInstance& inst, const FirstStage& x) {
  double base = 0.0;
  double g[kCbScenarioDim] = {0, 0, 0, 0};
  for (int i = 0; i < inst.n(); ++i) {
    if (!x[i]) continue;
    base += inst.cost[i];
    for (int k = 0; k < kCbScenarioDim; ++k) {
      g[k] += inst.cost[i] * inst.phi[i * kCbScenarioDim + k];
    }
  }
  for (double v : g) base += std::abs(v) / 2.0;
  return base;
}

std::optional<Scenario> CbFeasibilityScenario(const CapitalBudgetingInstance& inst,
                                              const FirstStage& x) {
  CheckFirstStage(inst, x);
  if (CbMaxCost(inst, x) <= inst.budget + BudgetSlackTol(inst)) return std::nullopt;
  Scenario xi(kCbScenarioDim, 0.0);
  for (int k = 0; k < kCbScenarioDim; ++k) {
    double g = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
      if (x[i]) g += inst.cost[i] * inst.phi[i * kCbScenarioDim + k];
    }
    xi[k] = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
  }
  return xi;
}

int FirstStageFeatureWidth(Family family) {
  return family == Family::kKnapsack ? kKnapsackFeatures : 3;
}

int ScenarioFeatureWidth(Family family) {
  return family == Family::kKnapsack ? kKnapsackFeatures : 4;
}

namespace {

void KnapsackStatic(const KnapsackInstance& kp, int i, double* row) {
  row[1] = kp.outsource[i];
  row[2] = kp.profit[i];
  row[3] = kp.deviation[i];
  row[4] = kp.outsource[i] - kp.profit[i];
  row[5] = kp.weight[i];
  row[6] = kp.repair[i];
  row[7] = kp.capacity;
}

}  // namespace

neural::Matrix FirstStageFeatures(const Instance& inst, const FirstStage& x) {
  CheckFirstStage(inst, x);
  const int n = NumItems(inst);
  neural::Matrix m(n, FirstStageFeatureWidth(FamilyOf(inst)));
  for (int i = 0; i < n; ++i) {
    double* row = m.row(i).data();
    row[0] = x[i];
    if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
      KnapsackStatic(*kp, i, row);
    } else {
      const auto& cb = std::get<CapitalBudgetingInstance>(inst);
      row[1] = cb.revenue[i];
      row[2] = cb.cost[i];
    }
  }
  return m;
}

neural::Matrix ScenarioFeatures(const Instance& inst, const Scenario& xi) {
  CheckScenario(inst, xi);
  const int n = NumItems(inst);
  neural::Matrix m(n, ScenarioFeatureWidth(FamilyOf(inst)));
  for (int i = 0; i < n; ++i) {
    double* row = m.row(i).data();
    if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
      row[0] = xi[i];
      KnapsackStatic(*kp, i, row);
    } else {
      const auto& cb = std::get<CapitalBudgetingInstance>(inst);
      row[0] = cb.CostFactor(i, xi);
      row[1] = cb.RevenueFactor(i, xi);
      row[2] = cb.revenue[i];
      row[3] = cb.cost[i];
    }
  }
  return m;
}

embed::FeatureExprs ScenarioFeatureExprs(const Instance& inst,
                                         std::span<const int> xi_vars) {
  if (static_cast<int>(xi_vars.size()) != ScenarioDim(inst)) {
    throw InputError("scenario variable count does not match the instance");
  }
  const int n = NumItems(inst);
  const Scenario zero(ScenarioDim(inst), 0.0);
  const neural::Matrix base = ScenarioFeatures(inst, zero);
  embed::FeatureExprs f{n, base.cols, {}};
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < base.cols; ++c) f.expr.emplace_back(base(i, c));
  }
  auto at = [&](int i, int c) -> LinExpr& { return f.expr[i * base.cols + c]; };
  if (FamilyOf(inst) == Family::kKnapsack) {
    for (int i = 0; i < n; ++i) at(i, 0) = LinExpr::Var(xi_vars[i]);
  } else {
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < kCbScenarioDim; ++k) {
        at(i, 0).Add(xi_vars[k], cb.phi[i * kCbScenarioDim + k] / 2.0);
        at(i, 1).Add(xi_vars[k], cb.psi[i * kCbScenarioDim + k] / 2.0);
      }
    }
  }
  return f;
}

}  // namespace roccg::problems
