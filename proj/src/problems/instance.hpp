#ifndef ROCCG_PROBLEMS_INSTANCE_HPP_
#define ROCCG_PROBLEMS_INSTANCE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace roccg::problems {

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kCbScenarioDim = 4;

using Scenario = std::vector<double>;
using FirstStage = std::vector<int>;

enum class Family { kKnapsack, kCapitalBudgeting };
std::string_view ToString(Family f);
Family ParseFamily(std::string_view s);

// Profit-weight relationship of a knapsack instance.
enum class Correlation { kUncorrelated, kWeakly, kAlmostStrongly, kStrongly };
std::string_view ToString(Correlation c);
Correlation ParseCorrelation(std::string_view s);  // "UN", "WC", "ASC", "SC"

struct KnapsackInstance {
  std::string id;
  std::uint64_t seed = 0;
  Correlation correlation = Correlation::kUncorrelated;
  std::vector<double> profit;     // p̄
  std::vector<double> deviation;  // p̂
  std::vector<double> outsource;  // f
  std::vector<double> weight;     // c
  std::vector<double> repair;     // t
  double capacity = 0.0;          // C
  double budget = 0.0;            // Γ

  int n() const { return static_cast<int>(profit.size()); }
  // Throws InputError naming the offending field.
  void Validate() const;
};

// Costs and revenues depend on ξ ∈ [-1, 1]^4 through
// c_i(ξ) = (1 + Φ_i ξ / 2) c̄_i and r_i(ξ) = (1 + Ψ_i ξ / 2) r̄_i.
struct CapitalBudgetingInstance {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<double> cost;     // c̄
  std::vector<double> revenue;  // r̄
  std::vector<double> phi;      // n x 4, row-major
  std::vector<double> psi;      // n x 4, row-major
  double budget = 0.0;          // B
  double eta = 0.8;             // postponement factor

  int n() const { return static_cast<int>(cost.size()); }
  double CostFactor(int i, const Scenario& xi) const;
  double RevenueFactor(int i, const Scenario& xi) const;
  double Cost(int i, const Scenario& xi) const { return CostFactor(i, xi) * cost[i]; }
  double Revenue(int i, const Scenario& xi) const {
    return RevenueFactor(i, xi) * revenue[i];
  }
  void Validate() const;
};

using Instance = std::variant<KnapsackInstance, CapitalBudgetingInstance>;

Family FamilyOf(const Instance& inst);
const std::string& IdOf(const Instance& inst);
int NumItems(const Instance& inst);
int ScenarioDim(const Instance& inst);
void Validate(const Instance& inst);

// Throws UsageError for n < 1.
KnapsackInstance GenerateKnapsack(int n, Correlation correlation, std::uint64_t seed);
CapitalBudgetingInstance GenerateCapitalBudgeting(int n, std::uint64_t seed);

nlohmann::json InstanceToJson(const Instance& inst);
Instance InstanceFromJson(const nlohmann::json& doc);
void SaveInstance(const Instance& inst, const std::string& path);
Instance LoadInstance(const std::string& path);

// Throws InputError when x is not a 0/1 vector of the instance's length.
void CheckFirstStage(const Instance& inst, const FirstStage& x);

// Membership in Ξ within `tol`: budgeted set for knapsack, box for capital
// budgeting.
bool InUncertaintySet(const Instance& inst, const Scenario& xi, double tol = 1e-9);

}  // namespace roccg::problems

#endif  // ROCCG_PROBLEMS_INSTANCE_HPP_
