#ifndef ROCCG_DATAGEN_SAMPLING_HPP_
#define ROCCG_DATAGEN_SAMPLING_HPP_

#include <cstdint>

#include "common/random.hpp"
#include "problems/instance.hpp"

namespace roccg::datagen {

// Draws ρ ~ U[0,1], then x_i ~ Bernoulli(ρ). For capital budgeting the most
// expensive selected projects are dropped until c̄'x <= B.
problems::FirstStage SampleFirstStage(const problems::Instance& inst, Rng& rng);
problems::FirstStage SampleFirstStage(const problems::Instance& inst,
                                      std::uint64_t seed);

// Box: componentwise uniform on [-1,1]. Budgeted set: uniform on [0,1]^n,
// rescaled by Γ/Σξ when the budget is exceeded.
problems::Scenario SampleScenario(const problems::Instance& inst, Rng& rng);
problems::Scenario SampleScenario(const problems::Instance& inst, std::uint64_t seed);

}  // namespace roccg::datagen

#endif  // ROCCG_DATAGEN_SAMPLING_HPP_
