#include "milp/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "common/error.hpp"
#include "milp/simplex.hpp"

namespace roccg::milp {

namespace {

using Clock = std::chrono::steady_clock;

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::int64_t id = 0;
  double bound = -kInf;  // LP bound of the parent, minimization form
  std::vector<BoundChange> changes;
  std::shared_ptr<const DenseSimplex::Basis> basis;
  // Branching that created this node, for pseudocost updates.
  int branched = -1;
  bool up = false;
  double frac_change = 0.0;
};

// Per-unit objective degradation observed when branching each variable down
// and up; unobserved directions borrow the running average.
class Pseudocosts {
 public:
  explicit Pseudocosts(int n) : sum_(2 * n, 0.0), count_(2 * n, 0) {}

  void Record(int var, bool up, double gain_per_unit) {
    const int k = 2 * var + (up ? 1 : 0);
    sum_[k] += gain_per_unit;
    ++count_[k];
    total_[up] += gain_per_unit;
    ++total_count_[up];
  }

  double Estimate(int var, bool up) const {
    const int k = 2 * var + (up ? 1 : 0);
    if (count_[k] > 0) return sum_[k] / count_[k];
    return total_count_[up] > 0 ? total_[up] / total_count_[up] : 1.0;
  }

 private:
  std::vector<double> sum_;
  std::vector<int> count_;
  double total_[2] = {0.0, 0.0};
  int total_count_[2] = {0, 0};
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct Candidate {
  bool ok = false;
  double min_objective = kInf;
  std::vector<double> values;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Rounds the integer part of an integral LP point and, when the rounded point
// breaches a row (big-M rows amplify integrality slack), re-solves the LP
// with every integer variable fixed.
Candidate Polish(const MilpModel& model, const std::vector<int>& int_vars,
                 std::vector<double> x, double sign,
                 const SolveConfig& config) {
  Candidate cand;
  for (int v : int_vars) x[v] = std::round(x[v]);
  SolutionCheck check = EvaluateSolution(model, x, config.feasibility_tol,
                                         config.integrality_tol);
  if (!check.feasible) {
    MilpModel fixed = model;
    for (int v : int_vars) fixed.SetVariableBounds(v, x[v], x[v]);
    SolveResult lp = SolveLp(fixed, config);
    if (lp.status != SolveStatus::kOptimal) return cand;
    x = lp.values;
    for (int v : int_vars) x[v] = std::round(x[v]);
    check = EvaluateSolution(model, x, 10 * config.feasibility_tol,
                             config.integrality_tol);
    if (!check.feasible) return cand;
  }
  cand.ok = true;
  cand.min_objective = sign * check.objective;
  cand.values = std::move(x);
  return cand;
}

}  // namespace

SolveResult SolveMilp(const MilpModel& model, const SolveConfig& config) {
  const Clock::time_point start = Clock::now();
  model.Validate();
  config.Validate();
  const double sign =
      model.objective_sense() == ObjSense::kMaximize ? -1.0 : 1.0;
  const int n = model.num_variables();

  SolveResult result;
  std::vector<int> int_vars;
  std::vector<double> root_lb(n), root_ub(n);
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    root_lb[j] = v.lower;
    root_ub[j] = v.upper;
    if (v.type == VarType::kContinuous) continue;
    int_vars.push_back(j);
    root_lb[j] = std::ceil(v.lower - config.integrality_tol);
    root_ub[j] = std::floor(v.upper + config.integrality_tol);
    if (root_lb[j] > root_ub[j]) {
      result.status = SolveStatus::kInfeasible;
      result.wall_seconds = Seconds(start);
      return result;
    }
  }

  const bool has_priority = std::any_of(int_vars.begin(), int_vars.end(), [&](int v) {
    return model.variable(v).branch_priority > 0;
  });
  DenseSimplex lp(model, config.feasibility_tol);
  for (int v : int_vars) lp.SetBounds(v, root_lb[v], root_ub[v]);

  auto gap_of = [&](double incumbent) {
    return config.gap_tol * std::max(1.0, std::abs(incumbent));
  };

  double incumbent = config.cutoff ? sign * *config.cutoff : kInf;
  std::vector<double> incumbent_values;
  Clock::time_point last_improvement = start;
  double pruned_bound = kInf;  // smallest bound among nodes closed by gap
  bool limit_hit = false;
  bool unstable_seen = false;

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  std::vector<BoundChange> applied;  // bound changes currently in `lp`
  std::optional<Node> next = Node{};
  bool dive = true;  // the root is solved from the initial tableau
  std::int64_t next_id = 1;
  std::int64_t nodes = 0;
  Pseudocosts pseudo(n);

  while (true) {
    if (!next) {
      if (open.empty()) break;
      next = open.top();
      open.pop();
      dive = false;
      if (next->bound >= incumbent - gap_of(incumbent)) {
        pruned_bound = std::min(pruned_bound, next->bound);
        while (!open.empty()) open.pop();
        next.reset();
        break;
      }
    }
    Node node = std::move(*next);
    next.reset();

    const double elapsed = Seconds(start);
    if (elapsed >= config.time_limit_seconds ||
        Seconds(last_improvement) >= config.no_improvement_timeout_seconds ||
        nodes >= config.node_limit) {
      limit_hit = true;
      open.push(std::move(node));
      break;
    }
    ++nodes;

    if (dive) {
      if (!node.changes.empty()) {
        const BoundChange& c = node.changes.back();
        lp.SetBounds(c.var, c.lower, c.upper);
      }
    } else {
      for (const BoundChange& c : applied) {
        lp.SetBounds(c.var, root_lb[c.var], root_ub[c.var]);
      }
      for (const BoundChange& c : node.changes) {
        lp.SetBounds(c.var, c.lower, c.upper);
      }
      if (node.basis) lp.LoadBasis(*node.basis);
    }
    applied = node.changes;

    LpStatus status = lp.Solve();
    if (status == LpStatus::kUnstable) {
      lp.LoadBasis({});
      status = lp.Solve();
    }
    if (status == LpStatus::kUnstable) {
      unstable_seen = true;
      continue;
    }
    if (status == LpStatus::kInfeasible) continue;
    if (status == LpStatus::kUnbounded) {
      if (nodes == 1) {
        result.status = SolveStatus::kUnbounded;
        result.ray = lp.ray();
        result.nodes = nodes;
        result.lp_iterations = lp.iterations();
        result.wall_seconds = Seconds(start);
        return result;
      }
      unstable_seen = true;
      continue;
    }
    const double obj = lp.MinObjective();
    if (node.branched >= 0 && node.frac_change > 0.0 && std::isfinite(node.bound)) {
      pseudo.Record(node.branched, node.up,
                    std::max(0.0, obj - node.bound) / node.frac_change);
    }
    if (obj >= incumbent - gap_of(incumbent)) {
      pruned_bound = std::min(pruned_bound, obj);
      continue;
    }

    std::vector<double> x = lp.StructuralValues();
    // Highest priority first, then the pseudocost product score.
    int branch_var = -1;
    int branch_priority = 0;
    double branch_score = 0.0;
    for (int v : int_vars) {
      const double frac = x[v] - std::floor(x[v]);
      if (std::min(frac, 1.0 - frac) <= config.integrality_tol) continue;
      const double score =
          std::max(pseudo.Estimate(v, false) * frac, 1e-6) *
          std::max(pseudo.Estimate(v, true) * (1.0 - frac), 1e-6);
      const int priority = model.variable(v).branch_priority;
      if (branch_var < 0 || priority > branch_priority ||
          (priority == branch_priority && score > branch_score)) {
        branch_score = score;
        branch_priority = priority;
        branch_var = v;
      }
    }

    if (config.leaf_oracle && (branch_var < 0 || branch_priority <= 0) &&
        has_priority) {
      // The oracle completes this LP point; the node closes only once every
      // priority variable is fixed by its bounds.
      int unfixed = -1;
      for (int v : int_vars) {
        if (model.variable(v).branch_priority <= 0) continue;
        x[v] = std::round(x[v]);
        if (unfixed < 0 && lp.lower(v) < lp.upper(v)) unfixed = v;
      }
      std::optional<std::vector<double>> leaf = config.leaf_oracle(x);
      if (leaf) {
        const SolutionCheck check = EvaluateSolution(
            model, *leaf, config.feasibility_tol, config.integrality_tol);
        if (!check.feasible) {
          throw Error(ErrorKind::kInternal, "leaf oracle returned an infeasible assignment");
        }
        if (sign * check.objective < incumbent) {
          incumbent = sign * check.objective;
          incumbent_values = std::move(*leaf);
          last_improvement = Clock::now();
        }
      }
      if (unfixed < 0 || obj >= incumbent - gap_of(incumbent)) continue;
      auto basis = std::make_shared<const DenseSimplex::Basis>(lp.GetBasis());
      const double split = x[unfixed] < lp.upper(unfixed) ? x[unfixed] : x[unfixed] - 1.0;
      Node down{next_id++, obj, node.changes, basis};
      down.changes.push_back({unfixed, lp.lower(unfixed), split});
      Node up{next_id++, obj, std::move(node.changes), basis};
      up.changes.push_back({unfixed, split + 1.0, lp.upper(unfixed)});
      // Revisit the side holding the current point last; its LP is unchanged.
      if (x[unfixed] <= split) {
        open.push(std::move(down));
        next = std::move(up);
      } else {
        open.push(std::move(up));
        next = std::move(down);
      }
      dive = true;
      continue;
    }

    if (branch_var < 0) {
      Candidate cand = Polish(model, int_vars, std::move(x), sign, config);
      if (cand.ok && cand.min_objective < incumbent) {
        incumbent = cand.min_objective;
        incumbent_values = std::move(cand.values);
        last_improvement = Clock::now();
      }
      continue;
    }

    auto basis = std::make_shared<const DenseSimplex::Basis>(lp.GetBasis());
    const double value = x[branch_var];
    const double down_ub = std::floor(value);
    Node down{next_id++, obj, node.changes, basis, branch_var, false, value - down_ub};
    down.changes.push_back({branch_var, lp.lower(branch_var), down_ub});
    Node up{next_id++, obj, std::move(node.changes), basis, branch_var, true,
            down_ub + 1.0 - value};
    up.changes.push_back({branch_var, down_ub + 1.0, lp.upper(branch_var)});
    if (value - down_ub >= 0.5) {
      open.push(std::move(down));
      next = std::move(up);
    } else {
      open.push(std::move(up));
      next = std::move(down);
    }
    dive = true;
  }

  double open_bound = kInf;
  if (!open.empty()) open_bound = open.top().bound;
  result.nodes = nodes;
  result.lp_iterations = lp.iterations();
  if (!incumbent_values.empty()) {
    result.values = std::move(incumbent_values);
    result.objective = sign * incumbent;
    const double bound =
        std::min({incumbent, pruned_bound, limit_hit ? open_bound : kInf});
    result.best_bound = sign * bound;
    result.status = (limit_hit || unstable_seen) ? SolveStatus::kFeasible
                                                 : SolveStatus::kOptimal;
  } else if (limit_hit) {
    result.status = SolveStatus::kLimitNoIncumbent;
    result.best_bound = sign * std::min(open_bound, pruned_bound);
  } else if (config.cutoff && !unstable_seen) {
    result.status = SolveStatus::kCutoff;
    result.best_bound = sign * std::min(incumbent, pruned_bound);
  } else {
    result.status = unstable_seen ? SolveStatus::kNumericallyUnstable
                                  : SolveStatus::kInfeasible;
  }
  result.wall_seconds = Seconds(start);
  return result;
}

}  // namespace roccg::milp
