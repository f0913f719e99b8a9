#include "milp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "common/error.hpp"

namespace roccg::milp {

namespace {

constexpr int kReinvertInterval = 100;
constexpr int kDegenerateRunForBland = 50;
constexpr double kDropTol = 1e-14;

}  // namespace

std::string_view ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kLimitNoIncumbent: return "limit-no-incumbent";
    case SolveStatus::kNumericallyUnstable: return "numerically-unstable";
    case SolveStatus::kCutoff: return "cutoff";
  }
  return "unknown";
}

void SolveConfig::Validate() const {
  if (!(feasibility_tol > 0) || !(integrality_tol > 0) || !(gap_tol > 0)) {
    throw UsageError("solver tolerances must be positive");
  }
  if (time_limit_seconds < 0 || no_improvement_timeout_seconds < 0 ||
      node_limit < 0) {
    throw UsageError("solver limits must be non-negative");
  }
}

DenseSimplex::DenseSimplex(const MilpModel& model, double feasibility_tol)
    : n_(model.num_variables()),
      m_(model.num_constraints()),
      cols_(n_ + m_),
      feas_tol_(feasibility_tol) {
  a_.assign(static_cast<size_t>(m_) * n_, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : model.constraint(i).terms) {
      a_[static_cast<size_t>(i) * n_ + t.var] += t.coef;
    }
  }
  const double sign =
      model.objective_sense() == ObjSense::kMaximize ? -1.0 : 1.0;
  cost_.assign(cols_, 0.0);
  double cost_scale = 1.0;
  for (const Term& t : model.objective().terms()) {
    cost_[t.var] += sign * t.coef;
    cost_scale = std::max(cost_scale, std::abs(t.coef));
  }
  obj_offset_ = sign * model.objective().constant();
  opt_tol_ = 1e-9 * cost_scale;

  lb_.resize(cols_);
  ub_.resize(cols_);
  for (int j = 0; j < n_; ++j) {
    lb_[j] = model.variable(j).lower;
    ub_[j] = model.variable(j).upper;
  }
  for (int i = 0; i < m_; ++i) {
    const Constraint& c = model.constraint(i);
    const int j = n_ + i;
    switch (c.sense) {
      case RowSense::kLessEqual: lb_[j] = -kInf; ub_[j] = c.rhs; break;
      case RowSense::kGreaterEqual: lb_[j] = c.rhs; ub_[j] = kInf; break;
      case RowSense::kEqual: lb_[j] = c.rhs; ub_[j] = c.rhs; break;
    }
  }
  x_.assign(cols_, 0.0);
  at_upper_.assign(cols_, 0);
  ResetToLogicalBasis();
}

void DenseSimplex::ResetToLogicalBasis() {
  tab_.assign(static_cast<size_t>(m_) * cols_, 0.0);
  basis_.resize(m_);
  row_of_.assign(cols_, -1);
  for (int i = 0; i < m_; ++i) {
    const double* arow = &a_[static_cast<size_t>(i) * n_];
    for (int j = 0; j < n_; ++j) T(i, j) = -arow[j];
    T(i, n_ + i) = 1.0;
    basis_[i] = n_ + i;
    row_of_[n_ + i] = i;
  }
  for (int j = 0; j < n_; ++j) {
    at_upper_[j] = std::isinf(lb_[j]) && !std::isinf(ub_[j]);
  }
  ComputeBasicValues();
  ComputeReducedCosts();
  pivots_since_reinvert_ = 0;
}

void DenseSimplex::ComputeBasicValues() {
  for (int j = 0; j < cols_; ++j) {
    if (row_of_[j] >= 0) continue;
    if (at_upper_[j] && !std::isinf(ub_[j])) {
      x_[j] = ub_[j];
    } else if (!std::isinf(lb_[j])) {
      x_[j] = lb_[j];
      at_upper_[j] = 0;
    } else if (!std::isinf(ub_[j])) {
      x_[j] = ub_[j];
      at_upper_[j] = 1;
    } else {
      x_[j] = 0.0;
    }
  }
  std::vector<int> active;
  for (int j = 0; j < cols_; ++j) {
    if (row_of_[j] < 0 && x_[j] != 0.0) active.push_back(j);
  }
  for (int i = 0; i < m_; ++i) {
    double v = 0.0;
    const double* row = &tab_[static_cast<size_t>(i) * cols_];
    for (int j : active) v -= row[j] * x_[j];
    x_[basis_[i]] = v;
  }
}

void DenseSimplex::ComputeReducedCosts() {
  d_ = cost_;
  for (int i = 0; i < m_; ++i) {
    const double cb = cost_[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &tab_[static_cast<size_t>(i) * cols_];
    for (int j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
  }
  for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

void DenseSimplex::SetBounds(int var, double lower, double upper) {
  lb_[var] = lower;
  ub_[var] = upper;
  if (row_of_[var] >= 0) return;
  const double old = x_[var];
  double now;
  if (at_upper_[var] && !std::isinf(upper)) {
    now = upper;
  } else if (!std::isinf(lower)) {
    now = lower;
    at_upper_[var] = 0;
  } else if (!std::isinf(upper)) {
    now = upper;
    at_upper_[var] = 1;
  } else {
    now = 0.0;
  }
  const double delta = now - old;
  x_[var] = now;
  if (delta == 0.0) return;
  for (int i = 0; i < m_; ++i) x_[basis_[i]] -= T(i, var) * delta;
}

void DenseSimplex::Pivot(int r, int q) {
  double* prow = &tab_[static_cast<size_t>(r) * cols_];
  const double inv = 1.0 / prow[q];
  pivot_nz_.clear();
  for (int j = 0; j < cols_; ++j) {
    if (prow[j] == 0.0) continue;
    prow[j] *= inv;
    if (std::abs(prow[j]) < kDropTol) {
      prow[j] = 0.0;
    } else {
      pivot_nz_.push_back(j);
    }
  }
  prow[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tab_[static_cast<size_t>(i) * cols_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (int j : pivot_nz_) row[j] -= f * prow[j];
    row[q] = 0.0;
  }
  const double fd = d_[q];
  if (fd != 0.0) {
    for (int j : pivot_nz_) d_[j] -= fd * prow[j];
  }
  d_[q] = 0.0;
  row_of_[basis_[r]] = -1;
  basis_[r] = q;
  row_of_[q] = r;
  ++pivots_since_reinvert_;
  ++iterations_;
}

bool DenseSimplex::Reinvert() {
  // Rebuild [-A | I] and eliminate the basic columns with partial pivoting.
  // Logical basics are unit columns of the starting matrix and are placed
  // first so they cost nothing.
  tab_.assign(static_cast<size_t>(m_) * cols_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double* arow = &a_[static_cast<size_t>(i) * n_];
    for (int j = 0; j < n_; ++j) T(i, j) = -arow[j];
    T(i, n_ + i) = 1.0;
  }
  std::vector<int> old_basis = basis_;
  std::vector<int> new_basis(m_, -1);
  std::vector<int> structural;
  for (int col : old_basis) {
    if (col >= n_) {
      new_basis[col - n_] = col;
    } else {
      structural.push_back(col);
    }
  }
  std::vector<std::uint8_t> assigned(m_, 0);
  for (int i = 0; i < m_; ++i) assigned[i] = new_basis[i] >= 0;
  for (int col : structural) {
    int best = -1;
    double best_abs = 1e-9;
    for (int i = 0; i < m_; ++i) {
      if (assigned[i]) continue;
      const double v = std::abs(T(i, col));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    if (best < 0) {
      ResetToLogicalBasis();
      return false;
    }
    double* prow = &tab_[static_cast<size_t>(best) * cols_];
    const double inv = 1.0 / prow[col];
    pivot_nz_.clear();
    for (int j = 0; j < cols_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      if (std::abs(prow[j]) < kDropTol) {
        prow[j] = 0.0;
      } else {
        pivot_nz_.push_back(j);
      }
    }
    prow[col] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == best) continue;
      double* row = &tab_[static_cast<size_t>(i) * cols_];
      const double f = row[col];
      if (f == 0.0) continue;
      for (int j : pivot_nz_) row[j] -= f * prow[j];
      row[col] = 0.0;
    }
    assigned[best] = 1;
    new_basis[best] = col;
  }
  basis_ = new_basis;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int i = 0; i < m_; ++i) row_of_[basis_[i]] = i;
  ComputeBasicValues();
  ComputeReducedCosts();
  pivots_since_reinvert_ = 0;
  return true;
}

DenseSimplex::Basis DenseSimplex::GetBasis() const {
  return Basis{basis_, at_upper_};
}

void DenseSimplex::LoadBasis(const Basis& basis) {
  if (static_cast<int>(basis.basic.size()) != m_ ||
      static_cast<int>(basis.at_upper.size()) != cols_) {
    ResetToLogicalBasis();
    return;
  }
  basis_ = basis.basic;
  at_upper_ = basis.at_upper;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int i = 0; i < m_; ++i) row_of_[basis_[i]] = i;
  Reinvert();
}

bool DenseSimplex::IsNonbasicMovable(int j, double d, int* dir) const {
  if (row_of_[j] >= 0) return false;
  const double lo = lb_[j];
  const double hi = ub_[j];
  if (lo == hi) return false;
  if (std::isinf(lo) && std::isinf(hi)) {
    if (std::abs(d) <= opt_tol_) return false;
    *dir = d < 0 ? 1 : -1;
    return true;
  }
  if (at_upper_[j]) {
    if (d > opt_tol_) {
      *dir = -1;
      return true;
    }
    return false;
  }
  if (d < -opt_tol_) {
    *dir = 1;
    return true;
  }
  return false;
}

int DenseSimplex::InfeasibilityCount(std::vector<double>* costs) const {
  int count = 0;
  costs->assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    if (x_[j] < lb_[j] - feas_tol_) {
      (*costs)[i] = -1.0;
      ++count;
    } else if (x_[j] > ub_[j] + feas_tol_) {
      (*costs)[i] = 1.0;
      ++count;
    }
  }
  return count;
}

LpStatus DenseSimplex::Solve() {
  ray_.clear();
  const std::int64_t budget = 200LL * (m_ + n_) + 20000;
  std::int64_t steps = 0;
  int degenerate_run = 0;
  bool verified = false;
  std::vector<double> p1cost;
  std::vector<double> d1(cols_);
  std::vector<double> alpha(m_);
  struct Breakpoint {
    double t;
    int row;
  };
  std::vector<Breakpoint> breakpoints;

  while (true) {
    if (++steps > budget) return LpStatus::kUnstable;
    if (pivots_since_reinvert_ >= kReinvertInterval) Reinvert();
    const int ninf = InfeasibilityCount(&p1cost);
    const bool phase1 = ninf > 0;
    const double* dd = d_.data();
    if (phase1) {
      std::fill(d1.begin(), d1.end(), 0.0);
      for (int i = 0; i < m_; ++i) {
        if (p1cost[i] == 0.0) continue;
        const double* row = &tab_[static_cast<size_t>(i) * cols_];
        const double c = p1cost[i];
        for (int j = 0; j < cols_; ++j) d1[j] -= c * row[j];
      }
      for (int i = 0; i < m_; ++i) d1[basis_[i]] = 0.0;
      dd = d1.data();
    }

    const bool bland = degenerate_run >= kDegenerateRunForBland;
    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
      int dj = 0;
      if (!IsNonbasicMovable(j, dd[j], &dj)) continue;
      const double score = std::abs(dd[j]);
      if (bland) {
        q = j;
        dir = dj;
        break;
      }
      if (score > best) {
        best = score;
        q = j;
        dir = dj;
      }
    }
    if (q < 0) {
      if (!verified && pivots_since_reinvert_ > 0) {
        // Refresh the tableau and re-price before declaring the outcome.
        verified = true;
        Reinvert();
        continue;
      }
      return phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;
    }
    verified = false;

    for (int i = 0; i < m_; ++i) alpha[i] = -T(i, q) * dir;

    // Harris pass 1: largest step keeping blocking variables within their
    // bounds relaxed by the feasibility tolerance.
    double tmax = kInf;
    breakpoints.clear();
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= pivot_tol_) continue;
      const int j = basis_[i];
      const double v = x_[j];
      if (phase1 && p1cost[i] != 0.0) {
        const bool below = p1cost[i] < 0.0;
        if (below && a > 0.0) {
          breakpoints.push_back({(lb_[j] - v) / a, i});
          if (!std::isinf(ub_[j])) tmax = std::min(tmax, (ub_[j] + feas_tol_ - v) / a);
        } else if (!below && a < 0.0) {
          breakpoints.push_back({(ub_[j] - v) / a, i});
          if (!std::isinf(lb_[j])) tmax = std::min(tmax, (lb_[j] - feas_tol_ - v) / a);
        }
        continue;
      }
      if (a > 0.0 && !std::isinf(ub_[j])) {
        tmax = std::min(tmax, (ub_[j] + feas_tol_ - v) / a);
      } else if (a < 0.0 && !std::isinf(lb_[j])) {
        tmax = std::min(tmax, (lb_[j] - feas_tol_ - v) / a);
      }
    }
    const double flip = ub_[q] - lb_[q];  // inf for half-open or free columns

    int leave_row = -1;
    bool leave_at_upper = false;
    double step = 0.0;
    bool do_flip = false;

    if (phase1 && !breakpoints.empty()) {
      std::sort(breakpoints.begin(), breakpoints.end(),
                [](const Breakpoint& a, const Breakpoint& b) {
                  return a.t < b.t || (a.t == b.t && a.row < b.row);
                });
      double slope = dd[q] * dir;
      const double limit = std::min(tmax, flip);
      for (const Breakpoint& bp : breakpoints) {
        if (bp.t > limit) break;
        slope += std::abs(alpha[bp.row]);
        if (slope >= -opt_tol_) {
          leave_row = bp.row;
          step = std::max(bp.t, 0.0);
          leave_at_upper = p1cost[bp.row] > 0.0;
          break;
        }
      }
      if (leave_row < 0 && std::isinf(limit)) {
        // Slope never turned; stop at the last breakpoint.
        const Breakpoint& bp = breakpoints.back();
        leave_row = bp.row;
        step = std::max(bp.t, 0.0);
        leave_at_upper = p1cost[bp.row] > 0.0;
      }
    }

    if (leave_row < 0) {
      if (std::isinf(tmax) && std::isinf(flip)) {
        if (phase1) return LpStatus::kUnstable;
        ray_.assign(n_, 0.0);
        if (q < n_) ray_[q] = dir;
        for (int i = 0; i < m_; ++i) {
          if (basis_[i] < n_) ray_[basis_[i]] = alpha[i];
        }
        return LpStatus::kUnbounded;
      }
      // Harris pass 2: among rows blocking within tmax, the largest pivot.
      double best_pivot = 0.0;
      int best_index = cols_;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= pivot_tol_) continue;
        const int j = basis_[i];
        const double v = x_[j];
        double t;
        bool upper;
        if (phase1 && p1cost[i] != 0.0) {
          const bool below = p1cost[i] < 0.0;
          if (below && a > 0.0 && !std::isinf(ub_[j])) {
            t = (ub_[j] - v) / a;
            upper = true;
          } else if (!below && a < 0.0 && !std::isinf(lb_[j])) {
            t = (lb_[j] - v) / a;
            upper = false;
          } else {
            continue;
          }
        } else if (a > 0.0 && !std::isinf(ub_[j])) {
          t = (ub_[j] - v) / a;
          upper = true;
        } else if (a < 0.0 && !std::isinf(lb_[j])) {
          t = (lb_[j] - v) / a;
          upper = false;
        } else {
          continue;
        }
        if (t > tmax) continue;
        const bool better = bland ? j < best_index
                                  : std::abs(a) > best_pivot;
        if (better) {
          best_pivot = std::abs(a);
          best_index = j;
          leave_row = i;
          leave_at_upper = upper;
          step = std::max(t, 0.0);
        }
      }
      if (leave_row < 0 || flip <= step) {
        do_flip = true;
        leave_row = -1;
        step = flip;
      }
    }

    degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;

    if (step != 0.0) {
      x_[q] += dir * step;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[basis_[i]] += alpha[i] * step;
      }
    }
    if (do_flip) {
      at_upper_[q] = dir > 0;
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      continue;
    }
    const int leaving = basis_[leave_row];
    x_[leaving] = leave_at_upper ? ub_[leaving] : lb_[leaving];
    at_upper_[leaving] = leave_at_upper;
    Pivot(leave_row, q);
  }
}

double DenseSimplex::MinObjective() const {
  double v = obj_offset_;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return v;
}

std::vector<double> DenseSimplex::StructuralValues() const {
  return std::vector<double>(x_.begin(), x_.begin() + n_);
}

SolveResult SolveLp(const MilpModel& model, const SolveConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  model.Validate();
  config.Validate();
  DenseSimplex lp(model, config.feasibility_tol);
  const LpStatus status = lp.Solve();
  SolveResult result;
  result.lp_iterations = lp.iterations();
  switch (status) {
    case LpStatus::kOptimal: {
      result.status = SolveStatus::kOptimal;
      result.values = lp.StructuralValues();
      const double sign =
          model.objective_sense() == ObjSense::kMaximize ? -1.0 : 1.0;
      result.objective = sign * lp.MinObjective();
      result.best_bound = result.objective;
      break;
    }
    case LpStatus::kInfeasible: result.status = SolveStatus::kInfeasible; break;
    case LpStatus::kUnbounded:
      result.status = SolveStatus::kUnbounded;
      result.ray = lp.ray();
      break;
    case LpStatus::kUnstable:
      result.status = SolveStatus::kNumericallyUnstable;
      break;
  }
  result.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return result;
}

}  // namespace roccg::milp
