#ifndef ROCCG_MILP_SIMPLEX_HPP_
#define ROCCG_MILP_SIMPLEX_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "milp/model.hpp"
#include "milp/solve_types.hpp"

namespace roccg::milp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kUnstable };

// Bounded-variable primal simplex on a dense tableau.
//
// Every row i of the model becomes `a_i x - r_i = 0` with a logical column r_i
// carrying the row bounds, so the initial basis is the logical identity and
// all bounds (structural and row) are handled implicitly. Phase 1 minimizes
// the sum of bound infeasibilities of the basic variables, so the solver can
// restart from any basis (used for warm starts inside branch-and-bound).
// Pricing is Dantzig's rule, switching to Bland's smallest-index rule after a
// run of degenerate pivots, which rules out cycling.
class DenseSimplex {
 public:
  struct Basis {
    std::vector<int> basic;            // column basic in each row
    std::vector<std::uint8_t> at_upper;  // per column, for nonbasic columns
  };

  DenseSimplex(const MilpModel& model, double feasibility_tol);

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }

  // Changes the bounds of a structural column, keeping the tableau valid.
  void SetBounds(int var, double lower, double upper);
  double lower(int var) const { return lb_[var]; }
  double upper(int var) const { return ub_[var]; }

  LpStatus Solve();

  // Objective in minimization form (negated for maximization models).
  double MinObjective() const;
  std::vector<double> StructuralValues() const;
  const std::vector<double>& ray() const { return ray_; }
  std::int64_t iterations() const { return iterations_; }

  Basis GetBasis() const;
  // Rebuilds the tableau for a stored basis; falls back to the logical basis
  // when the stored one is numerically singular.
  void LoadBasis(const Basis& basis);

 private:
  double& T(int row, int col) { return tab_[static_cast<size_t>(row) * cols_ + col]; }
  double T(int row, int col) const {
    return tab_[static_cast<size_t>(row) * cols_ + col];
  }

  void ResetToLogicalBasis();
  bool Reinvert();
  void ComputeBasicValues();
  void ComputeReducedCosts();
  void Pivot(int row, int col);
  bool IsNonbasicMovable(int j, double d, int* dir) const;
  int InfeasibilityCount(std::vector<double>* costs) const;

  int n_ = 0;
  int m_ = 0;
  int cols_ = 0;
  double feas_tol_ = 1e-7;
  double opt_tol_ = 1e-9;
  double pivot_tol_ = 1e-9;

  std::vector<double> a_;     // m x n original constraint matrix
  std::vector<double> cost_;  // length cols_, minimization form
  double obj_offset_ = 0.0;
  std::vector<double> lb_, ub_;
  std::vector<double> tab_;   // m x cols_
  std::vector<double> x_;     // all column values
  std::vector<double> d_;     // phase-2 reduced costs
  std::vector<int> basis_;    // column basic in row
  std::vector<int> row_of_;   // row of basic column or -1
  std::vector<std::uint8_t> at_upper_;
  std::vector<double> ray_;
  std::vector<int> pivot_nz_;
  std::int64_t iterations_ = 0;
  int pivots_since_reinvert_ = 0;
};

// Solves the LP relaxation of `model` (integrality ignored).
SolveResult SolveLp(const MilpModel& model, const SolveConfig& config = {});

}  // namespace roccg::milp

#endif  // ROCCG_MILP_SIMPLEX_HPP_
