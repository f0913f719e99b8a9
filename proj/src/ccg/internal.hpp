#ifndef ROCCG_CCG_INTERNAL_HPP_
#define ROCCG_CCG_INTERNAL_HPP_

#include <span>

#include "ccg/ccg.hpp"
#include "milp/model.hpp"

namespace roccg::ccg {

// Throws UsageError/InputError when the model does not fit the instance.
void CheckModelFor(const problems::Instance& inst, const neural::ValueModel& model);

// First-stage objective term at a fixed scenario as an expression in x.
milp::LinExpr FirstStageExpr(const problems::Instance& inst, std::span<const int> x,
                             const Scenario& xi);

}  // namespace roccg::ccg

#endif  // ROCCG_CCG_INTERNAL_HPP_
