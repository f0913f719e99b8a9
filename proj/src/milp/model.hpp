#ifndef ROCCG_MILP_MODEL_HPP_
#define ROCCG_MILP_MODEL_HPP_

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace roccg::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { kContinuous, kBinary, kInteger };
enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class ObjSense { kMinimize, kMaximize };

struct Term {
  int var = -1;
  double coef = 0.0;
};

// Affine expression sum(coef * var) + constant. Duplicate variables are
// allowed while building and merged by Normalize().
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}
  static LinExpr Var(int var, double coef = 1.0) {
    LinExpr e;
    e.terms_.push_back({var, coef});
    return e;
  }

  LinExpr& Add(int var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
  }
  LinExpr& AddConstant(double c) {
    constant_ += c;
    return *this;
  }
  LinExpr& AddScaled(const LinExpr& other, double scale);
  LinExpr& operator+=(const LinExpr& other) { return AddScaled(other, 1.0); }
  LinExpr& operator-=(const LinExpr& other) { return AddScaled(other, -1.0); }
  LinExpr& operator*=(double scale);

  // Merges duplicate variables and drops zero coefficients; terms end up
  // sorted by variable index.
  void Normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool IsConstant() const { return terms_.empty(); }

  double Evaluate(std::span<const double> values) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::kContinuous;
  std::string name;
  // Fractional integer variables of the highest priority are branched first.
  int branch_priority = 0;
};

struct Constraint {
  std::vector<Term> terms;  // normalized, sorted by variable
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

// A linear / mixed-integer model. Models are built incrementally and are
// treated as immutable by every solver entry point.
class MilpModel {
 public:
  int AddVariable(double lower, double upper, VarType type,
                  std::string name = {});
  int AddContinuous(double lower, double upper, std::string name = {}) {
    return AddVariable(lower, upper, VarType::kContinuous, std::move(name));
  }
  int AddBinary(std::string name = {}) {
    return AddVariable(0.0, 1.0, VarType::kBinary, std::move(name));
  }

  // Adds `expr sense rhs`; the expression constant is moved to the right.
  int AddConstraint(LinExpr expr, RowSense sense, double rhs,
                    std::string name = {});
  int AddLessEqual(LinExpr expr, double rhs, std::string name = {}) {
    return AddConstraint(std::move(expr), RowSense::kLessEqual, rhs,
                         std::move(name));
  }
  int AddGreaterEqual(LinExpr expr, double rhs, std::string name = {}) {
    return AddConstraint(std::move(expr), RowSense::kGreaterEqual, rhs,
                         std::move(name));
  }
  int AddEqual(LinExpr expr, double rhs, std::string name = {}) {
    return AddConstraint(std::move(expr), RowSense::kEqual, rhs,
                         std::move(name));
  }

  void SetObjective(LinExpr expr, ObjSense sense);
  void SetVariableBounds(int var, double lower, double upper);
  void SetVariableType(int var, VarType type);
  void SetBranchPriority(int var, int priority);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(int i) const { return variables_.at(i); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Constraint& constraint(int i) const { return constraints_.at(i); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const LinExpr& objective() const { return objective_; }
  ObjSense objective_sense() const { return objective_sense_; }

  int CountIntegerVariables() const;

  // Throws ModelError on dangling references or inconsistent bounds.
  void Validate() const;

  // Copy of this model with every integer/binary variable made continuous.
  MilpModel Relaxed() const;

  // CPLEX LP-format text, for cross-checking with external solvers.
  void WriteLp(std::ostream& out) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  LinExpr objective_;
  ObjSense objective_sense_ = ObjSense::kMinimize;
};

struct SolutionCheck {
  bool feasible = false;
  double objective = 0.0;
  double max_violation = 0.0;
};

// Evaluates an assignment exactly: objective value and the largest bound,
// row or integrality breach. Throws std::invalid_argument on length mismatch.
SolutionCheck EvaluateSolution(const MilpModel& model,
                               std::span<const double> assignment,
                               double feasibility_tol = 1e-7,
                               double integrality_tol = 1e-6);

}  // namespace roccg::milp

#endif  // ROCCG_MILP_MODEL_HPP_
