#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "common/error.hpp"
#include "common/random.hpp"
#include "doctest.h"
#include "milp/branch_and_bound.hpp"
#include "problems/instance.hpp"
#include "problems/recourse.hpp"

using namespace roccg;
using namespace roccg::problems;
using neural::TargetMode;

namespace {

KnapsackInstance RunningExample() {
  KnapsackInstance kp;
  kp.id = "running";
  kp.outsource = {5, 5};
  kp.profit = {10, 8};
  kp.deviation = {4, 4};
  kp.weight = {3, 2};
  kp.repair = {1, 1};
  kp.capacity = 4;
  kp.budget = 1;
  return kp;
}

// Enumerates every (y, r) in {0,1}^2n.
double KnapsackBrute(const KnapsackInstance& kp, const FirstStage& x,
                     const Scenario& xi) {
  const int n = kp.n();
  double best = INFINITY;
  for (long mask = 0; mask < (1L << (2 * n)); ++mask) {
    double w = 0, v = 0;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const int y = (mask >> i) & 1, r = (mask >> (n + i)) & 1;
      if (y > x[i] || r > y) ok = false;
      w += kp.weight[i] * y + kp.repair[i] * r;
      v += (kp.deviation[i] * xi[i] - kp.outsource[i]) * y - kp.deviation[i] * xi[i] * r;
    }
    if (ok && w <= kp.capacity) best = std::min(best, v);
  }
  return best;
}

double CapitalBrute(const CapitalBudgetingInstance& cb, const FirstStage& x,
                    const Scenario& xi) {
  const int n = cb.n();
  double used = 0;
  for (int i = 0; i < n; ++i) used += x[i] * cb.Cost(i, xi);
  if (used > cb.budget + 1e-9) return INFINITY;
  double best = 0;
  for (long mask = 0; mask < (1L << n); ++mask) {
    double w = used, v = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (!((mask >> i) & 1)) continue;
      if (x[i]) ok = false;
      w += cb.Cost(i, xi);
      v -= cb.eta * cb.Revenue(i, xi);
    }
    if (ok && w <= cb.budget + 1e-9) best = std::min(best, v);
  }
  return best;
}

FirstStage RandomX(Rng& rng, int n, double density = 0.5) {
  FirstStage x(n);
  for (int& v : x) v = rng.Bernoulli(density);
  return x;
}

Scenario RandomBudgeted(Rng& rng, int n, double gamma) {
  Scenario xi(n);
  double sum = 0;
  for (double& v : xi) sum += (v = rng.Uniform());
  if (sum > gamma) {
    for (double& v : xi) v *= gamma / sum;
  }
  return xi;
}

Scenario RandomBox(Rng& rng) {
  Scenario xi(kCbScenarioDim);
  for (double& v : xi) v = rng.Uniform(-1, 1);
  return xi;
}

}  // namespace

TEST_CASE("knapsack generator recipe") {
  KnapsackInstance a = GenerateKnapsack(30, Correlation::kUncorrelated, 7);
  KnapsackInstance b = GenerateKnapsack(30, Correlation::kUncorrelated, 7);
  CHECK(a.profit == b.profit);
  CHECK(a.weight == b.weight);
  CHECK(a.id == b.id);
  CHECK(a.budget == 3);
  CHECK(a.capacity == std::round(0.35 * std::accumulate(a.weight.begin(), a.weight.end(), 0.0)));
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a.weight[i] >= 1);
    CHECK(a.weight[i] <= 100);
    CHECK(a.outsource[i] == doctest::Approx(1.1 * a.profit[i]));
    CHECK(a.repair[i] == std::ceil(a.weight[i] / 2));
    CHECK(a.deviation[i] == std::round(a.profit[i] / 2));
  }
  a.Validate();
  CHECK_THROWS_AS(GenerateKnapsack(0, Correlation::kStrongly, 1), UsageError);
}

TEST_CASE("knapsack correlation tags") {
  KnapsackInstance sc = GenerateKnapsack(40, Correlation::kStrongly, 3);
  for (int i = 0; i < sc.n(); ++i) CHECK(sc.profit[i] - sc.weight[i] == 10);
  KnapsackInstance asc = GenerateKnapsack(40, Correlation::kAlmostStrongly, 3);
  for (int i = 0; i < asc.n(); ++i) {
    CHECK(std::abs(asc.profit[i] - asc.weight[i] - 10) <= 2);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KnapsackInstance wc = GenerateKnapsack(80, Correlation::kWeakly, seed);
    const int n = wc.n();
    double mp = 0, mc = 0;
    for (int i = 0; i < n; ++i) {
      mp += wc.profit[i] / n;
      mc += wc.weight[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      sxy += (wc.profit[i] - mp) * (wc.weight[i] - mc);
      sxx += (wc.weight[i] - mc) * (wc.weight[i] - mc);
      syy += (wc.profit[i] - mp) * (wc.profit[i] - mp);
    }
    CHECK(sxy / std::sqrt(sxx * syy) >= 0.9);
  }
}

TEST_CASE("capital budgeting generator recipe") {
  CapitalBudgetingInstance cb = GenerateCapitalBudgeting(12, 5);
  cb.Validate();
  const Scenario zero(4, 0.0);
  double total = 0;
  for (int i = 0; i < cb.n(); ++i) {
    CHECK(cb.cost[i] >= 1);
    CHECK(cb.cost[i] <= 10);
    CHECK(cb.revenue[i] == doctest::Approx(cb.cost[i] / 5));
    CHECK(cb.Cost(i, zero) == cb.cost[i]);
    double row = 0;
    for (int k = 0; k < 4; ++k) {
      CHECK(cb.phi[i * 4 + k] >= 0);
      row += cb.phi[i * 4 + k];
    }
    CHECK(row == doctest::Approx(1.0));
    CHECK(cb.Cost(i, {1, 1, 1, 1}) == doctest::Approx(1.5 * cb.cost[i]));
    CHECK(cb.Cost(i, {-1, -1, -1, -1}) == doctest::Approx(0.5 * cb.cost[i]));
    total += cb.cost[i];
  }
  CHECK(cb.budget == doctest::Approx(total / 2));
  CHECK(cb.eta == 0.8);
}

TEST_CASE("capital budgeting budget binds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CapitalBudgetingInstance cb = GenerateCapitalBudgeting(10 + seed % 5, seed);
    double worst = 0;
    for (int i = 0; i < cb.n(); ++i) {
      double l1 = 0;
      for (int k = 0; k < 4; ++k) l1 += std::abs(cb.phi[i * 4 + k]);
      worst += cb.cost[i] * (1 + l1 / 2);
    }
    CHECK(cb.budget < worst);
  }
}

TEST_CASE("running knapsack example") {
  Instance inst = RunningExample();
  CHECK(*SecondStageValue(inst, {1, 1}, {1, 0}, TargetMode::kSum) == doctest::Approx(-13));
  CHECK(KnapsackBrute(std::get<KnapsackInstance>(inst), {1, 1}, {1, 0}) - 8 ==
        doctest::Approx(-13));
  CHECK(*SecondStageValue(inst, {0, 0}, {1, 0}, TargetMode::kSum) == 0);
  CHECK(*SecondStageValue(inst, {0, 0}, {0, 1}, TargetMode::kSecondOnly) == 0);
}

TEST_CASE("knapsack recourse matches enumeration and branch-and-bound") {
  Rng rng(41);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + static_cast<int>(rng.UniformInt(0, 6));
    const auto tag = static_cast<Correlation>(rng.UniformInt(0, 3));
    Instance inst = GenerateKnapsack(n, tag, 1000 + t);
    const auto& kp = std::get<KnapsackInstance>(inst);
    const FirstStage x = RandomX(rng, n);
    const Scenario xi = RandomBudgeted(rng, n, kp.budget);
    RecourseSolution sol = SolveSecondStage(inst, x, xi, TargetMode::kSecondOnly);
    REQUIRE(sol.feasible);
    CHECK(sol.value == doctest::Approx(KnapsackBrute(kp, x, xi)).epsilon(1e-12));
    double w = 0;
    for (int i = 0; i < n; ++i) {
      CHECK(sol.r[i] <= sol.y[i]);
      CHECK(sol.y[i] <= x[i]);
      w += kp.weight[i] * sol.y[i] + kp.repair[i] * sol.r[i];
    }
    CHECK(w <= kp.capacity);
    milp::SolveResult res =
        milp::SolveMilp(SecondStageModel(inst, x, xi, TargetMode::kSecondOnly));
    CHECK(res.objective == doctest::Approx(sol.value).epsilon(1e-9));
  }
}

TEST_CASE("fractional knapsack data uses the generic solver") {
  KnapsackInstance kp = RunningExample();
  kp.weight = {2.5, 2.0};
  kp.repair = {0.5, 1.0};
  Instance inst = kp;
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Scenario xi = RandomBudgeted(rng, 2, 1.0);
    CHECK(*SecondStageValue(inst, {1, 1}, xi, TargetMode::kSecondOnly) ==
          doctest::Approx(KnapsackBrute(kp, {1, 1}, xi)));
  }
}

TEST_CASE("capital budgeting recourse matches enumeration") {
  Rng rng(43);
  int infeasible = 0;
  for (int t = 0; t < 80; ++t) {
    const int n = 3 + static_cast<int>(rng.UniformInt(0, 7));
    Instance inst = GenerateCapitalBudgeting(n, 2000 + t);
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    const FirstStage x = RandomX(rng, n, rng.Uniform());
    const Scenario xi = RandomBox(rng);
    const double brute = CapitalBrute(cb, x, xi);
    auto v = SecondStageValue(inst, x, xi, TargetMode::kSecondOnly);
    if (std::isinf(brute)) {
      CHECK(!v.has_value());
      ++infeasible;
      milp::SolveResult res =
          milp::SolveMilp(SecondStageModel(inst, x, xi, TargetMode::kSecondOnly));
      CHECK(res.status == milp::SolveStatus::kInfeasible);
      continue;
    }
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(brute).epsilon(1e-12));
    milp::SolveResult res =
        milp::SolveMilp(SecondStageModel(inst, x, xi, TargetMode::kSecondOnly));
    CHECK(res.objective == doctest::Approx(*v).epsilon(1e-9));
  }
  CHECK(infeasible > 0);
}

TEST_CASE("capital budgeting nominal example") {
  CapitalBudgetingInstance cb;
  cb.id = "tiny";
  cb.cost = {5, 100};
  cb.revenue = {2, 20};
  cb.phi.assign(8, 0.25);
  cb.psi.assign(8, 0.25);
  cb.budget = 5;
  Instance inst = cb;
  CHECK(*SecondStageValue(inst, {1, 0}, {0, 0, 0, 0}, TargetMode::kSum) ==
        doctest::Approx(-2));
  CHECK(!SecondStageValue(inst, {1, 1}, {0, 0, 0, 0}, TargetMode::kSum));
}

TEST_CASE("target modes differ by the first-stage term") {
  Rng rng(47);
  for (int t = 0; t < 40; ++t) {
    Instance inst = t % 2 ? Instance(GenerateKnapsack(8, Correlation::kWeakly, t))
                          : Instance(GenerateCapitalBudgeting(8, t));
    const FirstStage x = RandomX(rng, 8, 0.3);
    const Scenario xi = t % 2 ? RandomBudgeted(rng, 8, 1.0) : RandomBox(rng);
    auto sum = SecondStageValue(inst, x, xi, TargetMode::kSum);
    auto second = SecondStageValue(inst, x, xi, TargetMode::kSecondOnly);
    REQUIRE(sum.has_value() == second.has_value());
    if (FamilyOf(inst) == Family::kKnapsack) CHECK(sum.has_value());
    if (sum) CHECK(*sum - *second == doctest::Approx(FirstStageCost(inst, x, xi)));
  }
}

TEST_CASE("negated capital budgeting value is a revenue") {
  Rng rng(53);
  for (int t = 0; t < 20; ++t) {
    Instance inst = GenerateCapitalBudgeting(6, 300 + t);
    const auto& cb = std::get<CapitalBudgetingInstance>(inst);
    const FirstStage x = RandomX(rng, 6, 0.3);
    const Scenario xi = RandomBox(rng);
    RecourseSolution sol = SolveSecondStage(inst, x, xi, TargetMode::kSum);
    if (!sol.feasible) continue;
    double revenue = 0;
    for (int i = 0; i < 6; ++i) revenue += cb.Revenue(i, xi) * (x[i] + cb.eta * sol.y[i]);
    CHECK(-sol.value == doctest::Approx(revenue));
  }
}

TEST_CASE("feasibility scenario") {
  CapitalBudgetingInstance cb = GenerateCapitalBudgeting(10, 9);
  CHECK(!CbFeasibilityScenario(cb, FirstStage(10, 0)));

  CapitalBudgetingInstance flat = cb;
  std::fill(flat.phi.begin(), flat.phi.end(), 0.0);
  FirstStage all(10, 1);
  auto s = CbFeasibilityScenario(flat, all);
  REQUIRE(s.has_value());
  CHECK(*s == Scenario(4, 0.0));
  FirstStage half(10, 0);
  for (int i = 0; i < 3; ++i) half[i] = 1;
  CHECK(!CbFeasibilityScenario(flat, half));

  Rng rng(59);
  for (int t = 0; t < 30; ++t) {
    CapitalBudgetingInstance inst = GenerateCapitalBudgeting(10, 500 + t);
    for (int k = 0; k < 40; ++k) inst.phi[k] = rng.Uniform(-0.5, 0.5);
    // Greedy x whose nominal cost sits just around B.
    FirstStage x(10, 0);
    double c = 0;
    for (int i = 0; i < 10 && c + inst.cost[i] <= inst.budget * 1.1; ++i) {
      x[i] = 1;
      c += inst.cost[i];
    }
    milp::MilpModel lp;
    milp::LinExpr obj;
    for (int k = 0; k < 4; ++k) {
      const int v = lp.AddContinuous(-1, 1);
      double coef = 0;
      for (int i = 0; i < 10; ++i) coef += x[i] * inst.cost[i] * inst.phi[i * 4 + k] / 2;
      obj.Add(v, coef);
    }
    obj.AddConstant(c);
    lp.SetObjective(obj, milp::ObjSense::kMaximize);
    milp::SolveResult res = milp::SolveMilp(lp);
    CHECK(std::abs(res.objective - CbMaxCost(inst, x)) <= 1e-8);
    auto sc = CbFeasibilityScenario(inst, x);
    CHECK(sc.has_value() == (res.objective > inst.budget));
    if (sc) {
      CHECK(InUncertaintySet(inst, *sc));
      CHECK(!SecondStageValue(inst, x, *sc, TargetMode::kSum));
    }
  }
}

TEST_CASE("feature matrices") {
  Instance kp = GenerateKnapsack(5, Correlation::kUncorrelated, 1);
  Instance cb = GenerateCapitalBudgeting(5, 1);
  CHECK(FirstStageFeatures(kp, FirstStage(5, 1)).cols == 8);
  CHECK(ScenarioFeatures(kp, Scenario(5, 0.1)).cols == 8);
  CHECK(FirstStageFeatures(cb, FirstStage(5, 1)).cols == 3);
  CHECK(ScenarioFeatures(cb, Scenario(4, 0.1)).cols == 4);

  KnapsackInstance twin = RunningExample();
  twin.profit = {10, 10};
  twin.outsource = {5, 5};
  twin.weight = {3, 3};
  neural::Matrix f = FirstStageFeatures(Instance(twin), {1, 1});
  CHECK(std::equal(f.row(0).begin(), f.row(0).end(), f.row(1).begin()));

  auto& k = std::get<KnapsackInstance>(kp);
  k.profit[2] = 77;
  neural::Matrix g = FirstStageFeatures(kp, {0, 1, 0, 1, 0});
  CHECK(g(2, 2) == 77);
  CHECK(g(1, 0) == 1);
  CHECK(g(0, 7) == k.capacity);
}

TEST_CASE("symbolic scenario features agree with numeric ones") {
  Rng rng(61);
  for (Instance inst : {Instance(GenerateKnapsack(6, Correlation::kWeakly, 2)),
                        Instance(GenerateCapitalBudgeting(6, 2))}) {
    milp::MilpModel model;
    std::vector<int> vars;
    for (int k = 0; k < ScenarioDim(inst); ++k) vars.push_back(model.AddContinuous(-1, 1));
    embed::FeatureExprs f = ScenarioFeatureExprs(inst, vars);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> xi(ScenarioDim(inst));
      for (double& v : xi) v = rng.Uniform(0, 0.3);
      neural::Matrix ref = ScenarioFeatures(inst, xi);
      for (int r = 0; r < f.rows; ++r) {
        for (int c = 0; c < f.cols; ++c) {
          CHECK(f.at(r, c).Evaluate(xi) == doctest::Approx(ref(r, c)));
        }
      }
    }
  }
}

TEST_CASE("instance json round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "roccg_problems_test";
  std::filesystem::create_directories(dir);
  for (Instance inst : {Instance(GenerateKnapsack(7, Correlation::kAlmostStrongly, 4)),
                        Instance(GenerateCapitalBudgeting(7, 4))}) {
    const std::string path = (dir / (IdOf(inst) + ".json")).string();
    SaveInstance(inst, path);
    Instance back = LoadInstance(path);
    CHECK(InstanceToJson(back) == InstanceToJson(inst));
  }
  nlohmann::json doc = InstanceToJson(GenerateKnapsack(3, Correlation::kStrongly, 1));
  doc["schema_version"] = 99;
  CHECK_THROWS_WITH_AS(InstanceFromJson(doc), doctest::Contains("schema_version"),
                       InputError);
  doc = InstanceToJson(GenerateKnapsack(3, Correlation::kStrongly, 1));
  doc.erase("capacity");
  CHECK_THROWS_WITH_AS(InstanceFromJson(doc), doctest::Contains("capacity"), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("uncertainty set membership") {
  Instance kp = GenerateKnapsack(10, Correlation::kUncorrelated, 1);
  CHECK(InUncertaintySet(kp, Scenario(10, 0.0)));
  CHECK(InUncertaintySet(kp, Scenario(10, 0.1)));
  CHECK(!InUncertaintySet(kp, Scenario(10, 0.2)));
  Scenario neg(10, 0.0);
  neg[0] = -0.1;
  CHECK(!InUncertaintySet(kp, neg));
  Instance cb = GenerateCapitalBudgeting(3, 1);
  CHECK(InUncertaintySet(cb, {1, -1, 0.5, 0}));
  CHECK(!InUncertaintySet(cb, {1.1, 0, 0, 0}));
  CHECK(!InUncertaintySet(cb, {0, 0, 0}));
  CHECK_THROWS_AS(CheckFirstStage(cb, {0, 2, 0}), InputError);
}
