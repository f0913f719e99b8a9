#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "common/error.hpp"
#include "doctest.h"
#include "milp/branch_and_bound.hpp"
#include "milp/model.hpp"
#include "milp/simplex.hpp"

using namespace roccg::milp;

namespace {

// Solves a small dense system by Gaussian elimination; false if singular.
bool SolveSquare(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>* x) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-10) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x->resize(n);
  for (int i = 0; i < n; ++i) (*x)[i] = b[i] / a[i][i];
  return true;
}

// Best vertex of {A x <= b, 0 <= x <= u} for maximize c'x.
double VertexOracle(const std::vector<std::vector<double>>& a,
                    const std::vector<double>& b, const std::vector<double>& c,
                    double u) {
  const int n = static_cast<int>(c.size());
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (size_t i = 0; i < a.size(); ++i) {
    planes.push_back(a[i]);
    rhs.push_back(b[i]);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    planes.push_back(e);
    rhs.push_back(u);
    e[j] = -1.0;
    planes.push_back(e);
    rhs.push_back(0.0);
  }
  const int p = static_cast<int>(planes.size());
  double best = -kInf;
  std::vector<int> pick(n);
  std::vector<bool> mask(p, false);
  std::fill(mask.begin(), mask.begin() + n, true);
  do {
    std::vector<std::vector<double>> sa;
    std::vector<double> sb;
    for (int k = 0; k < p; ++k) {
      if (!mask[k]) continue;
      sa.push_back(planes[k]);
      sb.push_back(rhs[k]);
    }
    std::vector<double> x;
    if (!SolveSquare(sa, sb, &x)) continue;
    bool ok = true;
    for (int k = 0; k < p && ok; ++k) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += planes[k][j] * x[j];
      ok = lhs <= rhs[k] + 1e-8;
    }
    if (!ok) continue;
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += c[j] * x[j];
    best = std::max(best, v);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

struct BinaryProblem {
  MilpModel model;
  int n = 0;
};

BinaryProblem RandomBinaryProblem(std::mt19937_64& rng, int n, int rows) {
  std::uniform_int_distribution<int> coef(1, 20);
  std::uniform_int_distribution<int> obj(-10, 30);
  BinaryProblem p;
  p.n = n;
  for (int j = 0; j < n; ++j) p.model.AddBinary();
  for (int i = 0; i < rows; ++i) {
    LinExpr e;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      const int a = coef(rng);
      e.Add(j, a);
      total += a;
    }
    p.model.AddLessEqual(e, std::floor(total * 0.4));
  }
  LinExpr o;
  for (int j = 0; j < n; ++j) o.Add(j, obj(rng));
  p.model.SetObjective(o, ObjSense::kMaximize);
  return p;
}

double EnumerateBinary(const MilpModel& model, int n) {
  double best = -kInf;
  std::vector<double> x(n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1u;
    SolutionCheck c = EvaluateSolution(model, x);
    if (c.feasible) best = std::max(best, c.objective);
  }
  return best;
}

}  // namespace

TEST_CASE("lp with a single bounded variable") {
  MilpModel m;
  int x = m.AddContinuous(0, kInf);
  m.AddLessEqual(LinExpr::Var(x), 1.0);
  m.SetObjective(LinExpr::Var(x), ObjSense::kMaximize);
  SolveResult r = SolveLp(m);
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("lp without an upper bound is unbounded with an improving ray") {
  MilpModel m;
  int x = m.AddContinuous(0, kInf);
  m.AddGreaterEqual(LinExpr::Var(x), 0.0);
  m.SetObjective(LinExpr::Var(x), ObjSense::kMaximize);
  SolveResult r = SolveLp(m);
  REQUIRE(r.status == SolveStatus::kUnbounded);
  REQUIRE(r.ray.size() == 1);
  CHECK(r.ray[0] > 0.0);
}

TEST_CASE("random dense lps match vertex enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5;
    std::vector<std::vector<double>> a(5, std::vector<double>(n));
    std::vector<double> b(5), c(n);
    MilpModel m;
    for (int j = 0; j < n; ++j) m.AddContinuous(0.0, 10.0);
    for (int i = 0; i < 5; ++i) {
      LinExpr e;
      for (int j = 0; j < n; ++j) {
        a[i][j] = unit(rng) * 5.0;
        e.Add(j, a[i][j]);
      }
      b[i] = 2.0 + 8.0 * (unit(rng) + 1.0);
      m.AddLessEqual(e, b[i]);
    }
    LinExpr o;
    for (int j = 0; j < n; ++j) {
      c[j] = unit(rng) * 3.0;
      o.Add(j, c[j]);
    }
    m.SetObjective(o, ObjSense::kMaximize);
    SolveResult r = SolveLp(m);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(VertexOracle(a, b, c, 10.0)).epsilon(1e-6));
    SolutionCheck check = EvaluateSolution(m, r.values);
    CHECK(check.feasible);
  }
}

TEST_CASE("lp with equality rows and free variables") {
  MilpModel m;
  int x = m.AddContinuous(-kInf, kInf);
  int y = m.AddContinuous(-kInf, kInf);
  LinExpr s;
  s.Add(x, 1).Add(y, 1);
  m.AddEqual(s, 4.0);
  LinExpr d;
  d.Add(x, 1).Add(y, -1);
  m.AddLessEqual(d, 1.0);
  m.AddGreaterEqual(d, -1.0);
  LinExpr o;
  o.Add(x, 2).Add(y, 1);
  m.SetObjective(o, ObjSense::kMinimize);
  SolveResult r = SolveLp(m);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(5.5));
  CHECK(r.values[x] == doctest::Approx(1.5));
}

TEST_CASE("infeasible lp") {
  MilpModel m;
  int x = m.AddContinuous(0, 1);
  m.AddGreaterEqual(LinExpr::Var(x), 2.0);
  m.SetObjective(LinExpr::Var(x), ObjSense::kMinimize);
  CHECK(SolveLp(m).status == SolveStatus::kInfeasible);
}

TEST_CASE("degenerate lp terminates") {
  // Many redundant constraints through the optimal vertex.
  MilpModel m;
  const int n = 6;
  for (int j = 0; j < n; ++j) m.AddContinuous(0, kInf);
  for (int k = 1; k <= 12; ++k) {
    LinExpr e;
    for (int j = 0; j < n; ++j) e.Add(j, 1.0 + ((j * k) % 3));
    m.AddLessEqual(e, 0.0);
  }
  LinExpr o;
  for (int j = 0; j < n; ++j) o.Add(j, 1.0);
  m.SetObjective(o, ObjSense::kMaximize);
  SolveResult r = SolveLp(m);
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.lp_iterations < 1000);
}

TEST_CASE("binary knapsack") {
  MilpModel m;
  const double v[] = {6, 5, 4};
  const double w[] = {3, 2, 2};
  LinExpr cap, obj;
  for (int j = 0; j < 3; ++j) {
    int x = m.AddBinary();
    cap.Add(x, w[j]);
    obj.Add(x, v[j]);
  }
  m.AddLessEqual(cap, 4.0);
  m.SetObjective(obj, ObjSense::kMaximize);
  SolveResult r = SolveMilp(m);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(9.0));
  CHECK(r.values[0] == 0.0);
  CHECK(r.values[1] == 1.0);
  CHECK(r.values[2] == 1.0);
  CHECK(EnumerateBinary(m, 3) == 9.0);
  SolutionCheck check = EvaluateSolution(m, r.values);
  CHECK(check.feasible);
  CHECK(std::abs(check.objective - r.objective) <= 1e-9);
}

TEST_CASE("assignment problem has an integral relaxation") {
  MilpModel m;
  const double cost[2][2] = {{4, 1}, {2, 3}};
  int x[2][2];
  LinExpr obj;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      x[i][j] = m.AddBinary();
      obj.Add(x[i][j], cost[i][j]);
    }
  }
  for (int i = 0; i < 2; ++i) {
    LinExpr row, col;
    for (int j = 0; j < 2; ++j) {
      row.Add(x[i][j], 1);
      col.Add(x[j][i], 1);
    }
    m.AddEqual(row, 1);
    m.AddEqual(col, 1);
  }
  m.SetObjective(obj, ObjSense::kMinimize);
  SolveResult lp = SolveLp(m);
  SolveResult ip = SolveMilp(m);
  REQUIRE(ip.status == SolveStatus::kOptimal);
  CHECK(ip.objective == doctest::Approx(3.0));
  CHECK(ip.objective == doctest::Approx(lp.objective));
}

TEST_CASE("binary sum of three is infeasible") {
  MilpModel m;
  int a = m.AddBinary();
  int b = m.AddBinary();
  LinExpr e;
  e.Add(a, 1).Add(b, 1);
  m.AddEqual(e, 3);
  m.SetObjective(LinExpr::Var(a), ObjSense::kMinimize);
  CHECK(SolveMilp(m).status == SolveStatus::kInfeasible);
}

TEST_CASE("general integers") {
  // max 5x + 4y s.t. 6x + 4y <= 24, x + 2y <= 6, integers: optimum 20 at (4,0)
  MilpModel m;
  int x = m.AddVariable(0, kInf, VarType::kInteger);
  int y = m.AddVariable(0, kInf, VarType::kInteger);
  LinExpr c1, c2, o;
  c1.Add(x, 6).Add(y, 4);
  c2.Add(x, 1).Add(y, 2);
  o.Add(x, 5).Add(y, 4);
  m.AddLessEqual(c1, 24);
  m.AddLessEqual(c2, 6);
  m.SetObjective(o, ObjSense::kMaximize);
  SolveResult r = SolveMilp(m);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(20.0));
}

TEST_CASE("node limit reports a distinct status") {
  std::mt19937_64 rng(3);
  BinaryProblem p = RandomBinaryProblem(rng, 16, 3);
  SolveConfig cfg;
  cfg.node_limit = 0;
  SolveResult r = SolveMilp(p.model, cfg);
  CHECK(r.status == SolveStatus::kLimitNoIncumbent);
}

TEST_CASE("evaluate_solution") {
  MilpModel m;
  int x = m.AddBinary();
  int y = m.AddContinuous(0, 2);
  LinExpr e;
  e.Add(x, 1).Add(y, 1);
  m.AddLessEqual(e, 2);
  LinExpr o;
  o.Add(x, 3).Add(y, 1).AddConstant(1.0);
  m.SetObjective(o, ObjSense::kMaximize);

  SolutionCheck ok = EvaluateSolution(m, std::vector<double>{1.0, 1.0});
  CHECK(ok.feasible);
  CHECK(ok.max_violation == 0.0);
  CHECK(ok.objective == doctest::Approx(5.0));

  SolutionCheck frac = EvaluateSolution(m, std::vector<double>{0.4, 0.0});
  CHECK_FALSE(frac.feasible);
  CHECK(frac.max_violation == doctest::Approx(0.4));

  SolutionCheck row = EvaluateSolution(m, std::vector<double>{1.0, 1.5});
  CHECK_FALSE(row.feasible);
  CHECK(row.max_violation == doctest::Approx(0.5));

  CHECK_THROWS_AS(EvaluateSolution(m, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("dangling variable is a construction error") {
  MilpModel m;
  m.AddBinary();
  CHECK_THROWS_AS(m.AddLessEqual(LinExpr::Var(3), 1.0), roccg::ModelError);
  CHECK_THROWS_AS(m.AddVariable(2.0, 1.0, VarType::kContinuous),
                  roccg::ModelError);
}

TEST_CASE("lp text dump names every section") {
  MilpModel m;
  int x = m.AddBinary("x");
  int z = m.AddVariable(0, 5, VarType::kInteger, "z");
  LinExpr e;
  e.Add(x, 1).Add(z, 2);
  m.AddLessEqual(e, 4, "cap");
  m.SetObjective(e, ObjSense::kMaximize);
  std::ostringstream out;
  m.WriteLp(out);
  const std::string s = out.str();
  CHECK(s.find("Maximize") != std::string::npos);
  CHECK(s.find("Subject To") != std::string::npos);
  CHECK(s.find("Bounds") != std::string::npos);
  CHECK(s.find("Generals") != std::string::npos);
  CHECK(s.find("Binaries") != std::string::npos);
  CHECK(s.find("End") != std::string::npos);
}

TEST_CASE("milp optimum matches enumeration and the lp bound") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 6 + trial % 9;
    BinaryProblem p = RandomBinaryProblem(rng, n, 1 + trial % 3);
    SolveResult r = SolveMilp(p.model);
    REQUIRE(r.status == SolveStatus::kOptimal);
    const double truth = EnumerateBinary(p.model, n);
    const double gap = 1e-6 * std::max(1.0, std::abs(r.objective));
    CHECK(r.objective <= truth + 1e-9);
    CHECK(r.best_bound >= truth - 1e-9);
    CHECK(r.best_bound - r.objective <= gap + 1e-12);
    CHECK(SolveLp(p.model).objective >= r.objective - 1e-9);
    CHECK(EvaluateSolution(p.model, r.values).feasible);
  }
}

TEST_CASE("milp with continuous variables and big-m rows") {
  // min sum t_i with t_i >= a_i - M(1 - z_i), sum z = 2.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    MilpModel m;
    const int n = 8;
    std::vector<double> a(n);
    LinExpr card, obj;
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      int z = m.AddBinary();
      int t = m.AddContinuous(0, kInf);
      LinExpr row;
      row.Add(t, 1).Add(z, -100.0);
      m.AddGreaterEqual(row, a[i] - 100.0);
      card.Add(z, 1);
      obj.Add(t, 1).Add(z, -1.0);
    }
    m.AddEqual(card, 2);
    m.SetObjective(obj, ObjSense::kMinimize);
    std::sort(a.begin(), a.end());
    SolveResult r = SolveMilp(m);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(a[0] + a[1] - 2.0).epsilon(1e-9));
  }
}

TEST_CASE("repeated solves are identical") {
  std::mt19937_64 rng(19);
  BinaryProblem p = RandomBinaryProblem(rng, 14, 2);
  SolveResult a = SolveMilp(p.model);
  SolveResult b = SolveMilp(p.model);
  CHECK(a.objective == b.objective);
  CHECK(a.values == b.values);
  CHECK(a.nodes == b.nodes);
}

TEST_CASE("config validation") {
  SolveConfig cfg;
  cfg.feasibility_tol = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), roccg::UsageError);
  cfg = SolveConfig{};
  cfg.time_limit_seconds = -1.0;
  CHECK_THROWS_AS(cfg.Validate(), roccg::UsageError);
}

TEST_CASE("branch priorities and cutoffs keep the optimum") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 6 + trial % 5;
    BinaryProblem p = RandomBinaryProblem(rng, n, 1 + trial % 3);
    const double truth = EnumerateBinary(p.model, n);
    for (int j = 0; j < n; ++j) p.model.SetBranchPriority(j, static_cast<int>(rng() % 3));
    SolveResult r = SolveMilp(p.model);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(truth));

    SolveConfig loose;
    loose.cutoff = truth - 1.0;
    r = SolveMilp(p.model, loose);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(truth));

    SolveConfig tight;
    tight.cutoff = truth + 1e-3;
    r = SolveMilp(p.model, tight);
    CHECK(r.status == SolveStatus::kCutoff);
    CHECK_FALSE(r.has_solution());
  }
}

TEST_CASE("leaf oracle completes the priority variables") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    MilpModel m;
    std::vector<int> x(n), y(n);
    std::vector<double> cost(n), value(n), weight(n);
    LinExpr cap, obj;
    for (int i = 0; i < n; ++i) {
      x[i] = m.AddBinary();
      m.SetBranchPriority(x[i], 1);
      y[i] = m.AddBinary();
      cost[i] = u(rng);
      value[i] = u(rng) * 2.0;
      weight[i] = u(rng);
      m.AddLessEqual(LinExpr::Var(y[i]).Add(x[i], -1.0), 0.0);
      cap.Add(y[i], weight[i]);
      obj.Add(x[i], cost[i]).Add(y[i], -value[i]);
    }
    m.AddLessEqual(cap, 15.0);
    m.SetObjective(obj, ObjSense::kMinimize);
    const SolveResult plain = SolveMilp(m);

    int calls = 0;
    SolveConfig config;
    config.leaf_oracle = [&](std::span<const double> point)
        -> std::optional<std::vector<double>> {
      ++calls;
      std::vector<double> best;
      double best_obj = INFINITY;
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<double> vals(m.num_variables(), 0.0);
        double w = 0.0;
        for (int i = 0; i < n; ++i) {
          vals[x[i]] = point[x[i]];
          vals[y[i]] = ((mask >> i) & 1) && point[x[i]] > 0.5 ? 1.0 : 0.0;
          w += weight[i] * vals[y[i]];
        }
        if (w > 15.0) continue;
        const double o = obj.Evaluate(vals);
        if (o < best_obj) {
          best_obj = o;
          best = vals;
        }
      }
      return best;
    };
    const SolveResult hooked = SolveMilp(m, config);
    REQUIRE(hooked.status == SolveStatus::kOptimal);
    CHECK(calls > 0);
    CHECK(hooked.objective == doctest::Approx(plain.objective));
    double truth = kInf;
    std::vector<double> all(2 * n);
    for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
      for (int j = 0; j < 2 * n; ++j) all[j] = (mask >> j) & 1u;
      const SolutionCheck c = EvaluateSolution(m, all);
      if (c.feasible) truth = std::min(truth, c.objective);
    }
    CHECK(hooked.objective == doctest::Approx(truth));
  }
}
