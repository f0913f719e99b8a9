#include "milp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "common/error.hpp"

namespace roccg::milp {

LinExpr& LinExpr::AddScaled(const LinExpr& other, double scale) {
  if (scale == 0.0) return *this;
  terms_.reserve(terms_.size() + other.terms_.size());
  for (const Term& t : other.terms_) terms_.push_back({t.var, t.coef * scale});
  constant_ += other.constant_ * scale;
  return *this;
}

LinExpr& LinExpr::operator*=(double scale) {
  for (Term& t : terms_) t.coef *= scale;
  constant_ *= scale;
  return *this;
}

void LinExpr::Normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(merged);
}

double LinExpr::Evaluate(std::span<const double> values) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coef * values[t.var];
  return v;
}

int MilpModel::AddVariable(double lower, double upper, VarType type,
                           std::string name) {
  if (type == VarType::kBinary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw ModelError("variable '" + name + "' has inconsistent bounds");
  }
  variables_.push_back({lower, upper, type, std::move(name)});
  return num_variables() - 1;
}

int MilpModel::AddConstraint(LinExpr expr, RowSense sense, double rhs,
                             std::string name) {
  expr.Normalize();
  for (const Term& t : expr.terms()) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw ModelError("constraint '" + name + "' references variable " +
                       std::to_string(t.var) + " which does not exist");
    }
  }
  constraints_.push_back(
      {expr.terms(), sense, rhs - expr.constant(), std::move(name)});
  return num_constraints() - 1;
}

void MilpModel::SetObjective(LinExpr expr, ObjSense sense) {
  expr.Normalize();
  for (const Term& t : expr.terms()) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw ModelError("objective references variable " +
                       std::to_string(t.var) + " which does not exist");
    }
  }
  objective_ = std::move(expr);
  objective_sense_ = sense;
}

void MilpModel::SetVariableBounds(int var, double lower, double upper) {
  Variable& v = variables_.at(var);
  if (lower > upper) {
    throw ModelError("variable '" + v.name + "' has inconsistent bounds");
  }
  v.lower = lower;
  v.upper = upper;
}

void MilpModel::SetVariableType(int var, VarType type) {
  variables_.at(var).type = type;
}

void MilpModel::SetBranchPriority(int var, int priority) {
  variables_.at(var).branch_priority = priority;
}

int MilpModel::CountIntegerVariables() const {
  return static_cast<int>(
      std::count_if(variables_.begin(), variables_.end(), [](const auto& v) {
        return v.type != VarType::kContinuous;
      }));
}

void MilpModel::Validate() const {
  const int n = num_variables();
  for (const Variable& v : variables_) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw ModelError("variable '" + v.name + "' has inconsistent bounds");
    }
    if (v.type == VarType::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw ModelError("binary variable '" + v.name +
                       "' has bounds outside [0,1]");
    }
  }
  auto check_terms = [n](const std::vector<Term>& terms,
                         const std::string& where) {
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= n) {
        throw ModelError(where + " references variable " +
                         std::to_string(t.var) + " which does not exist");
      }
      if (!std::isfinite(t.coef)) {
        throw ModelError(where + " has a non-finite coefficient");
      }
    }
  };
  for (const Constraint& c : constraints_) {
    check_terms(c.terms, "constraint '" + c.name + "'");
    if (std::isnan(c.rhs)) throw ModelError("constraint '" + c.name + "' rhs");
  }
  check_terms(objective_.terms(), "objective");
}

MilpModel MilpModel::Relaxed() const {
  MilpModel copy = *this;
  for (Variable& v : copy.variables_) v.type = VarType::kContinuous;
  return copy;
}

namespace {

std::string LpName(const MilpModel& model, int var) {
  const std::string& name = model.variable(var).name;
  // LP format names may not start with a digit or contain brackets.
  if (name.empty()) return "v" + std::to_string(var);
  std::string out = "v" + std::to_string(var) + "_";
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  }
  return out;
}

void WriteTerms(std::ostream& out, const MilpModel& model,
                const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << " 0 " << LpName(model, 0);
    return;
  }
  for (const Term& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' '
        << LpName(model, t.var);
  }
}

}  // namespace

void MilpModel::WriteLp(std::ostream& out) const {
  out.precision(17);
  out << (objective_sense_ == ObjSense::kMinimize ? "Minimize" : "Maximize")
      << "\n obj:";
  WriteTerms(out, *this, objective_.terms());
  if (objective_.constant() != 0.0) {
    out << (objective_.constant() < 0 ? " - " : " + ")
        << std::abs(objective_.constant());
  }
  out << "\nSubject To\n";
  for (int i = 0; i < num_constraints(); ++i) {
    const Constraint& c = constraints_[i];
    out << " c" << i << ':';
    WriteTerms(out, *this, c.terms);
    switch (c.sense) {
      case RowSense::kLessEqual: out << " <= "; break;
      case RowSense::kEqual: out << " = "; break;
      case RowSense::kGreaterEqual: out << " >= "; break;
    }
    out << c.rhs << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < num_variables(); ++j) {
    const Variable& v = variables_[j];
    if (v.type == VarType::kBinary) continue;
    out << ' ';
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << LpName(*this, j) << " free\n";
      continue;
    }
    if (std::isinf(v.lower)) out << "-inf"; else out << v.lower;
    out << " <= " << LpName(*this, j) << " <= ";
    if (std::isinf(v.upper)) out << "+inf"; else out << v.upper;
    out << '\n';
  }
  bool header = false;
  for (int j = 0; j < num_variables(); ++j) {
    if (variables_[j].type != VarType::kInteger) continue;
    if (!header) out << "Generals\n";
    header = true;
    out << ' ' << LpName(*this, j) << '\n';
  }
  header = false;
  for (int j = 0; j < num_variables(); ++j) {
    if (variables_[j].type != VarType::kBinary) continue;
    if (!header) out << "Binaries\n";
    header = true;
    out << ' ' << LpName(*this, j) << '\n';
  }
  out << "End\n";
}

SolutionCheck EvaluateSolution(const MilpModel& model,
                               std::span<const double> assignment,
                               double feasibility_tol,
                               double integrality_tol) {
  if (static_cast<int>(assignment.size()) != model.num_variables()) {
    throw std::invalid_argument(
        "assignment length " + std::to_string(assignment.size()) +
        " does not match variable count " +
        std::to_string(model.num_variables()));
  }
  SolutionCheck check;
  double bound_violation = 0.0;
  double integrality_violation = 0.0;
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    const double x = assignment[j];
    bound_violation = std::max({bound_violation, v.lower - x, x - v.upper});
    if (v.type != VarType::kContinuous) {
      integrality_violation =
          std::max(integrality_violation, std::abs(x - std::round(x)));
    }
  }
  double row_violation = 0.0;
  for (const Constraint& c : model.constraints()) {
    double activity = 0.0;
    for (const Term& t : c.terms) activity += t.coef * assignment[t.var];
    double breach = 0.0;
    switch (c.sense) {
      case RowSense::kLessEqual: breach = activity - c.rhs; break;
      case RowSense::kGreaterEqual: breach = c.rhs - activity; break;
      case RowSense::kEqual: breach = std::abs(activity - c.rhs); break;
    }
    row_violation = std::max(row_violation, breach);
  }
  check.objective = model.objective().Evaluate(assignment);
  check.max_violation =
      std::max({0.0, bound_violation, row_violation, integrality_violation});
  check.feasible = bound_violation <= feasibility_tol &&
                   row_violation <= feasibility_tol &&
                   integrality_violation <= integrality_tol;
  return check;
}

}  // namespace roccg::milp
