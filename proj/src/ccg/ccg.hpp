#ifndef ROCCG_CCG_CCG_HPP_
#define ROCCG_CCG_CCG_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "milp/solve_types.hpp"
#include "neural/network.hpp"
#include "problems/instance.hpp"

namespace roccg::ccg {

using problems::FirstStage;
using problems::Scenario;

inline constexpr double kDedupTol = 1e-9;

enum class MpMode { kArgmax, kMax };
enum class ApMode { kMilp, kSampling, kLpRelax };
enum class Termination {
  kEpsilonConverged,
  kMaxIterations,
  kTimeLimit,
  kStalled,      // the new scenario was already in the pool
  kInfeasible,   // the main problem has no feasible first stage
};

std::string_view ToString(MpMode m);
std::string_view ToString(ApMode m);
std::string_view ToString(Termination t);
MpMode ParseMpMode(std::string_view s);
ApMode ParseApMode(std::string_view s);

// Ordered scenarios with L∞ deduplication and, when a model is attached, the
// scenario embedding of each entry.
class ScenarioPool {
 public:
  ScenarioPool() = default;
  ScenarioPool(const problems::Instance* inst, const neural::ValueModel* model)
      : inst_(inst), model_(model) {}

  // Returns false (and leaves the pool unchanged) for a duplicate.
  bool Add(const Scenario& xi);
  bool Contains(const Scenario& xi) const;

  int size() const { return static_cast<int>(scenarios_.size()); }
  bool empty() const { return scenarios_.empty(); }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const std::vector<std::vector<double>>& embeddings() const { return embeddings_; }

 private:
  const problems::Instance* inst_ = nullptr;
  const neural::ValueModel* model_ = nullptr;
  std::vector<Scenario> scenarios_;
  std::vector<std::vector<double>> embeddings_;
};

// The quantity the main and adversarial problems compare, in scaled label
// units: the network output, plus the first-stage term divided by the label
// range when the model predicts the second stage only.
double PredictedScore(const problems::Instance& inst, const neural::ValueModel& model,
                      const FirstStage& x, const Scenario& xi);
double PredictedScore(const problems::Instance& inst, const neural::ValueModel& model,
                      const FirstStage& x, std::span<const double> x_embedding,
                      const Scenario& xi, std::span<const double> xi_embedding);

struct MainResult {
  milp::SolveStatus status = milp::SolveStatus::kInfeasible;
  FirstStage x;
  int selected = -1;       // argmax mode: index of the selected pool scenario
  double objective = 0.0;  // unscaled, internal minimization sense
  std::int64_t binaries = 0;
  double wall_seconds = 0.0;
};

// Argmax mode: true second-stage block for the selected scenario, one value
// network copy per pool scenario and the selection gadget. Capital budgeting
// also gets c(ξ)'x <= B for every pool scenario.
MainResult SolveMainArgmax(const problems::Instance& inst, const neural::ValueModel& model,
                           const ScenarioPool& pool, const milp::SolveConfig& config);
// Max mode: min α s.t. α >= prediction for every pool scenario.
MainResult SolveMainMax(const problems::Instance& inst, const neural::ValueModel& model,
                        const ScenarioPool& pool, const milp::SolveConfig& config);

struct AdversarialResult {
  Scenario scenario;
  double value = 0.0;   // PredictedScore at `scenario`
  bool proven = true;   // false when a limit stopped the milp mode early
  milp::SolveStatus status = milp::SolveStatus::kOptimal;
  double wall_seconds = 0.0;
};

struct AdversarialConfig {
  ApMode mode = ApMode::kMilp;
  int samples = 1000;
  std::uint64_t seed = 0;
  milp::SolveConfig solve;
};

AdversarialResult SolveAdversarial(const problems::Instance& inst,
                                   const neural::ValueModel& model, const FirstStage& x,
                                   const AdversarialConfig& config);

// True when the adversarial value does not beat the pool's best by ε.
bool ShouldStop(double pool_best, double ap_value, double epsilon);

struct IterationRecord {
  int iteration = 0;
  double mp_obj = 0.0;
  double ap_val = 0.0;
  std::optional<double> lower;  // classical only
  std::optional<double> upper;
  int pool_size = 0;
  double wall_ms = 0.0;
  std::string action;
  bool ap_proven = true;

  nlohmann::json ToJson() const;
};

struct CcgResult {
  FirstStage x;
  double objective = 0.0;  // final MP objective (ML) or upper bound (classical)
  std::vector<Scenario> pool;
  std::vector<IterationRecord> log;
  Termination reason = Termination::kMaxIterations;
  int iterations = 0;
  double wall_ms = 0.0;
};

std::string LogToJsonl(const std::vector<IterationRecord>& log);

struct MlCcgConfig {
  double epsilon = 1e-3;  // scaled label units
  int max_iterations = 50;
  MpMode mp_mode = MpMode::kArgmax;
  ApMode ap_mode = ApMode::kMilp;
  int samples = 1000;
  double time_limit_seconds = 3600.0;
  milp::SolveConfig solve;
  std::uint64_t seed = 0;
  bool record_timing = false;  // wall_ms fields are 0 unless set

  void Validate() const;
};

CcgResult MlCcg(const problems::Instance& inst, const neural::ValueModel& model,
                const MlCcgConfig& config);

struct CcgConfig {
  int max_iterations = 100;
  double time_limit_seconds = 3600.0;
  milp::SolveConfig solve;
  bool record_timing = false;

  CcgConfig() { solve.gap_tol = 1e-10; }
  void Validate() const;
};

// Exact CCG for knapsack with the level-set main problem and the exact
// worst-case evaluator as adversary.
CcgResult ClassicalCcg(const problems::KnapsackInstance& inst, const CcgConfig& config);

}  // namespace roccg::ccg

#endif  // ROCCG_CCG_CCG_HPP_
