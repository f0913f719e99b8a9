#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "ccg/ccg.hpp"
#include "ccg/internal.hpp"
#include "common/error.hpp"
#include "common/random.hpp"
#include "eval/evaluate.hpp"
#include "milp/branch_and_bound.hpp"
#include "problems/recourse.hpp"

namespace roccg::ccg {

using milp::LinExpr;

namespace {

class Clock {
 public:
  explicit Clock(bool record) : record_(record), start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double RecordedMs() const { return record_ ? Seconds() * 1000.0 : 0.0; }

 private:
  bool record_;
  std::chrono::steady_clock::time_point start_;
};

Scenario CenterScenario(const problems::Instance& inst) {
  return Scenario(problems::ScenarioDim(inst), 0.0);
}

milp::SolveConfig WithDeadline(milp::SolveConfig c, double remaining) {
  c.time_limit_seconds = std::max(1e-3, std::min(c.time_limit_seconds, remaining));
  return c;
}

}  // namespace

CcgResult MlCcg(const problems::Instance& inst, const neural::ValueModel& model,
                const MlCcgConfig& config) {
  config.Validate();
  CheckModelFor(inst, model);
  const Clock clock(config.record_timing);
  ScenarioPool pool(&inst, &model);
  pool.Add(CenterScenario(inst));
  const auto* cb = std::get_if<problems::CapitalBudgetingInstance>(&inst);

  CcgResult result;
  result.reason = Termination::kMaxIterations;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const double remaining = config.time_limit_seconds - clock.Seconds();
    if (remaining <= 0.0) {
      result.reason = Termination::kTimeLimit;
      break;
    }
    result.iterations = it;
    IterationRecord rec;
    rec.iteration = it;
    const milp::SolveConfig solve = WithDeadline(config.solve, remaining);
    const MainResult mp = config.mp_mode == MpMode::kArgmax
                              ? SolveMainArgmax(inst, model, pool, solve)
                              : SolveMainMax(inst, model, pool, solve);
    if (mp.x.empty()) {
      rec.action = std::string("main-") + std::string(milp::ToString(mp.status));
      rec.pool_size = pool.size();
      rec.wall_ms = clock.RecordedMs();
      result.log.push_back(rec);
      result.reason = mp.status == milp::SolveStatus::kInfeasible ? Termination::kInfeasible
                                                                  : Termination::kTimeLimit;
      if (mp.status == milp::SolveStatus::kNumericallyUnstable) {
        throw SolverError("main problem is numerically unstable at iteration " +
                          std::to_string(it));
      }
      break;
    }
    result.x = mp.x;
    result.objective = mp.objective;
    rec.mp_obj = mp.objective;

    std::optional<Scenario> infeasible;
    if (cb) infeasible = problems::CbFeasibilityScenario(*cb, mp.x);

    AdversarialConfig ap_config;
    ap_config.mode = config.ap_mode;
    ap_config.samples = config.samples;
    ap_config.seed = MixSeed(config.seed, static_cast<std::uint64_t>(it));
    ap_config.solve = WithDeadline(config.solve, config.time_limit_seconds - clock.Seconds());
    const AdversarialResult ap = SolveAdversarial(inst, model, mp.x, ap_config);
    rec.ap_val = ap.value;
    rec.ap_proven = ap.proven;

    const std::vector<double> ex =
        model.EmbedX(problems::FirstStageFeatures(inst, mp.x));
    double pool_best = -milp::kInf;
    for (int j = 0; j < pool.size(); ++j) {
      pool_best = std::max(pool_best,
                           PredictedScore(inst, model, mp.x, ex, pool.scenarios()[j],
                                          pool.embeddings()[j]));
    }
    const bool stop = ShouldStop(pool_best, ap.value, config.epsilon);
    bool finished = false;
    if (infeasible) {
      const bool added_cut = pool.Add(*infeasible);
      const bool added_ap = !stop && pool.Add(ap.scenario);
      rec.action = added_ap ? "add-both" : "add-feasibility";
      if (!added_cut && !added_ap) {
        rec.action = "stalled";
        result.reason = Termination::kStalled;
        finished = true;
      }
    } else if (stop) {
      rec.action = "stop";
      result.reason = Termination::kEpsilonConverged;
      finished = true;
    } else if (pool.Add(ap.scenario)) {
      rec.action = "add-scenario";
    } else {
      rec.action = "stalled";
      result.reason = Termination::kStalled;
      finished = true;
    }
    rec.pool_size = pool.size();
    rec.wall_ms = clock.RecordedMs();
    result.log.push_back(rec);
    if (finished) break;
  }
  result.pool = pool.scenarios();
  result.wall_ms = clock.RecordedMs();
  return result;
}

namespace {

struct LevelSetResult {
  milp::SolveResult solve;
  FirstStage x;
};

// min μ s.t. μ >= objective(x, y^j, r^j; ξ_j) with a recourse copy per scenario.
// Branching is on x only; once x is integral the copies are completed by the
// exact recourse solver.
LevelSetResult SolveLevelSet(const problems::KnapsackInstance& kp,
                             const std::vector<Scenario>& pool,
                             milp::SolveConfig config) {
  milp::MilpModel m;
  const int n = kp.n();
  const int k = static_cast<int>(pool.size());
  std::vector<int> x(n);
  LinExpr first;
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = m.AddBinary("x" + std::to_string(i));
    m.SetBranchPriority(x[i], 1);
    first.Add(x[i], kp.outsource[i] - kp.profit[i]);
    lo += std::min(0.0, kp.outsource[i] - kp.profit[i]) - kp.outsource[i];
    hi += std::max(0.0, kp.outsource[i] - kp.profit[i]) + kp.deviation[i];
  }
  const int mu = m.AddContinuous(lo, hi, "mu");
  std::vector<std::vector<int>> y(k, std::vector<int>(n)), r(k, std::vector<int>(n));
  for (int j = 0; j < k; ++j) {
    const std::string tag = std::to_string(j);
    LinExpr row = LinExpr::Var(mu);
    row.AddScaled(first, -1.0);
    LinExpr cap;
    for (int i = 0; i < n; ++i) {
      y[j][i] = m.AddBinary("y" + tag + "_" + std::to_string(i));
      r[j][i] = m.AddBinary("r" + tag + "_" + std::to_string(i));
      m.AddLessEqual(LinExpr::Var(y[j][i]).Add(x[i], -1.0), 0.0);
      m.AddLessEqual(LinExpr::Var(r[j][i]).Add(y[j][i], -1.0), 0.0);
      cap.Add(y[j][i], kp.weight[i]).Add(r[j][i], kp.repair[i]);
      row.Add(y[j][i], -(kp.deviation[i] * pool[j][i] - kp.outsource[i]));
      row.Add(r[j][i], kp.deviation[i] * pool[j][i]);
    }
    m.AddLessEqual(cap, kp.capacity, "cap" + tag);
    m.AddGreaterEqual(row, 0.0, "level" + tag);
  }
  m.SetObjective(LinExpr::Var(mu), milp::ObjSense::kMinimize);

  const problems::Instance inst = kp;
  config.leaf_oracle = [&](std::span<const double> point)
      -> std::optional<std::vector<double>> {
    std::vector<double> values(m.num_variables(), 0.0);
    FirstStage fixed(n);
    for (int i = 0; i < n; ++i) values[x[i]] = fixed[i] = point[x[i]] > 0.5 ? 1 : 0;
    double worst = -milp::kInf;
    for (int j = 0; j < k; ++j) {
      const problems::RecourseSolution rec =
          problems::SolveSecondStage(inst, fixed, pool[j], neural::TargetMode::kSum);
      worst = std::max(worst, rec.value);
      for (int i = 0; i < n; ++i) {
        values[y[j][i]] = rec.y[i];
        values[r[j][i]] = rec.r[i];
      }
    }
    values[mu] = worst;
    return values;
  };
  LevelSetResult out;
  out.solve = milp::SolveMilp(m, config);
  if (out.solve.has_solution()) {
    for (int v : x) out.x.push_back(out.solve.values[v] > 0.5 ? 1 : 0);
  }
  return out;
}

constexpr double kMaxSearchCells = 2e7;

// Exact level-set main problem for integer knapsack data by depth-first search
// over x. A node's bound is the max over scenarios of a capacity DP in which
// the undecided items may still be taken or not.
class LevelSetSearch {
 public:
  static bool Applicable(const problems::KnapsackInstance& kp, int pool_size) {
    auto integral = [](double v) { return std::abs(v - std::round(v)) <= 1e-9; };
    for (int i = 0; i < kp.n(); ++i) {
      if (!integral(kp.weight[i]) || !integral(kp.repair[i])) return false;
    }
    return (kp.capacity + 1.0) * (kp.n() + 1) * pool_size <= kMaxSearchCells;
  }

  LevelSetSearch(const problems::KnapsackInstance& kp, const std::vector<Scenario>& pool,
                 const milp::SolveConfig& config)
      : n_(kp.n()),
        k_(static_cast<int>(pool.size())),
        cap_(static_cast<int>(std::floor(kp.capacity + 1e-9))),
        config_(config),
        options_(k_, std::vector<std::array<Option, 3>>(n_)),
        suffix_(k_, std::vector<std::vector<double>>(n_ + 1)) {
    for (int j = 0; j < k_; ++j) {
      for (int i = 0; i < n_; ++i) {
        const int w = static_cast<int>(std::lround(kp.weight[i]));
        const int t = static_cast<int>(std::lround(kp.repair[i]));
        const double dev = kp.deviation[i] * pool[j][i];
        options_[j][i] = {Option{0, kp.outsource[i] - kp.profit[i]},
                          Option{w, dev - kp.profit[i]}, Option{w + t, -kp.profit[i]}};
      }
      suffix_[j][n_].assign(cap_ + 1, 0.0);
      for (int i = n_ - 1; i >= 0; --i) {
        suffix_[j][i] = Extend(suffix_[j][i + 1], j, i, true);
      }
    }
  }

  LevelSetResult Solve() {
    start_ = std::chrono::steady_clock::now();
    incumbent_ = config_.cutoff ? *config_.cutoff : milp::kInf;
    Tables root(k_, std::vector<double>(cap_ + 1, 0.0));
    const double root_bound = Bound(root, 0);
    FirstStage x(n_, 0);
    Search(root, 0, x);
    LevelSetResult out;
    out.solve.nodes = nodes_;
    out.solve.wall_seconds = Elapsed();
    const bool found = !best_x_.empty();
    if (aborted_) {
      out.solve.status = found ? milp::SolveStatus::kFeasible
                               : milp::SolveStatus::kLimitNoIncumbent;
      out.solve.best_bound = root_bound;
    } else {
      out.solve.status = found ? milp::SolveStatus::kOptimal : milp::SolveStatus::kCutoff;
      out.solve.best_bound = incumbent_;
    }
    if (found) {
      out.solve.objective = incumbent_;
      out.x = best_x_;
    }
    return out;
  }

 private:
  struct Option {
    int weight;
    double value;
  };
  using Tables = std::vector<std::vector<double>>;

  // Adds item i to a min-value-within-capacity table; `optional` keeps x_i = 0.
  std::vector<double> Extend(const std::vector<double>& table, int j, int i,
                             bool optional) const {
    std::vector<double> out(cap_ + 1, milp::kInf);
    for (int w = 0; w <= cap_; ++w) {
      double v = optional ? table[w] : milp::kInf;
      for (const Option& o : options_[j][i]) {
        if (o.weight <= w) v = std::min(v, table[w - o.weight] + o.value);
      }
      out[w] = v;
    }
    return out;
  }

  double Bound(const Tables& prefix, int depth) const {
    double bound = -milp::kInf;
    for (int j = 0; j < k_; ++j) {
      const std::vector<double>& rest = suffix_[j][depth];
      double best = milp::kInf;
      for (int w = 0; w <= cap_; ++w) best = std::min(best, prefix[j][w] + rest[cap_ - w]);
      bound = std::max(bound, best);
    }
    return bound;
  }

  bool Prunes(double bound) const {
    return bound >= incumbent_ - config_.gap_tol * std::max(1.0, std::abs(incumbent_));
  }

  void Search(const Tables& prefix, int depth, FirstStage& x) {
    if (aborted_) return;
    if (++nodes_ % 256 == 0 && Elapsed() >= config_.time_limit_seconds) {
      aborted_ = true;
      return;
    }
    if (depth == n_) {
      double value = -milp::kInf;
      for (int j = 0; j < k_; ++j) value = std::max(value, prefix[j][cap_]);
      if (value < incumbent_ && !(config_.cutoff && value >= *config_.cutoff)) {
        incumbent_ = value;
        best_x_ = x;
      }
      return;
    }
    Tables child[2] = {prefix, Tables(k_)};
    for (int j = 0; j < k_; ++j) child[1][j] = Extend(prefix[j], j, depth, false);
    const double bound[2] = {Bound(child[0], depth + 1), Bound(child[1], depth + 1)};
    const int first = bound[1] < bound[0] ? 1 : 0;
    for (int c : {first, 1 - first}) {
      if (Prunes(bound[c])) continue;
      x[depth] = c;
      Search(child[c], depth + 1, x);
      x[depth] = 0;
    }
  }

  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  int n_, k_, cap_;
  milp::SolveConfig config_;
  std::vector<std::vector<std::array<Option, 3>>> options_;
  std::vector<Tables> suffix_;
  std::chrono::steady_clock::time_point start_;
  double incumbent_ = milp::kInf;
  FirstStage best_x_;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace

CcgResult ClassicalCcg(const problems::KnapsackInstance& kp, const CcgConfig& config) {
  config.Validate();
  kp.Validate();
  const Clock clock(config.record_timing);
  ScenarioPool pool;
  pool.Add(Scenario(kp.n(), 0.0));
  double lower = -milp::kInf, upper = milp::kInf;
  CcgResult result;
  result.reason = Termination::kMaxIterations;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const double remaining = config.time_limit_seconds - clock.Seconds();
    if (remaining <= 0.0) {
      result.reason = Termination::kTimeLimit;
      break;
    }
    result.iterations = it;
    // Only first stages strictly better than the incumbent can make progress.
    milp::SolveConfig solve = WithDeadline(config.solve, remaining);
    if (std::isfinite(upper)) solve.cutoff = upper - 1e-9 * std::max(1.0, std::abs(upper));
    const LevelSetResult mp = LevelSetSearch::Applicable(kp, pool.size())
                                  ? LevelSetSearch(kp, pool.scenarios(), solve).Solve()
                                  : SolveLevelSet(kp, pool.scenarios(), solve);
    IterationRecord rec;
    rec.iteration = it;
    if (mp.solve.status == milp::SolveStatus::kCutoff) {
      lower = std::max(lower, std::min(mp.solve.best_bound, upper));
      rec.mp_obj = mp.solve.best_bound;
      rec.ap_val = upper;
      rec.lower = lower;
      rec.upper = upper;
      rec.action = "stop";
      rec.pool_size = pool.size();
      rec.wall_ms = clock.RecordedMs();
      result.log.push_back(rec);
      result.reason = Termination::kEpsilonConverged;
      break;
    }
    if (mp.x.empty()) {
      if (mp.solve.status == milp::SolveStatus::kNumericallyUnstable) {
        throw SolverError("level-set main problem is numerically unstable");
      }
      rec.action = std::string("main-") + std::string(milp::ToString(mp.solve.status));
      rec.pool_size = pool.size();
      rec.wall_ms = clock.RecordedMs();
      result.log.push_back(rec);
      result.reason = Termination::kTimeLimit;
      break;
    }
    lower = std::max(lower, mp.solve.best_bound);
    const eval::WorstCase wc = eval::EvaluateExact(kp, mp.x);
    if (wc.value < upper) {
      upper = wc.value;
      result.x = mp.x;
    }
    rec.mp_obj = mp.solve.objective;
    rec.ap_val = wc.value;
    rec.lower = lower;
    rec.upper = upper;
    const bool converged = upper - lower <= 1e-9 * std::max(1.0, std::abs(upper)) ||
                           pool.Contains(wc.scenario);
    if (converged) {
      rec.action = "stop";
      result.reason = Termination::kEpsilonConverged;
    } else {
      pool.Add(wc.scenario);
      rec.action = "add-scenario";
    }
    rec.pool_size = pool.size();
    rec.wall_ms = clock.RecordedMs();
    result.log.push_back(rec);
    if (converged) break;
    if (mp.solve.status != milp::SolveStatus::kOptimal && clock.Seconds() >= config.time_limit_seconds) {
      result.reason = Termination::kTimeLimit;
      break;
    }
  }
  result.objective = upper;
  result.pool = pool.scenarios();
  result.wall_ms = clock.RecordedMs();
  return result;
}

}  // namespace roccg::ccg
