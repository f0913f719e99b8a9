#include "datagen/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace roccg::datagen {

using problems::CapitalBudgetingInstance;
using problems::FirstStage;
using problems::KnapsackInstance;
using problems::Scenario;

FirstStage SampleFirstStage(const problems::Instance& inst, Rng& rng) {
  const int n = problems::NumItems(inst);
  const double rho = rng.Uniform();
  FirstStage x(n);
  for (int& v : x) v = rng.Bernoulli(rho) ? 1 : 0;
  if (const auto* cb = std::get_if<CapitalBudgetingInstance>(&inst)) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cb->cost[a] > cb->cost[b]; });
    double used = 0.0;
    for (int i = 0; i < n; ++i) used += x[i] * cb->cost[i];
    for (int i : order) {
      if (used <= cb->budget) break;
      if (x[i]) {
        x[i] = 0;
        used -= cb->cost[i];
      }
    }
  }
  return x;
}

FirstStage SampleFirstStage(const problems::Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  return SampleFirstStage(inst, rng);
}

Scenario SampleScenario(const problems::Instance& inst, Rng& rng) {
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    Scenario xi(kp->n());
    double sum = 0.0;
    for (double& v : xi) sum += (v = rng.Uniform());
    if (sum > kp->budget) {
      const double scale = sum > 0.0 ? kp->budget / sum : 0.0;
      for (double& v : xi) v *= scale;
    }
    return xi;
  }
  Scenario xi(problems::kCbScenarioDim);
  for (double& v : xi) v = rng.Uniform(-1.0, 1.0);
  return xi;
}

Scenario SampleScenario(const problems::Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  return SampleScenario(inst, rng);
}

}  // namespace roccg::datagen
