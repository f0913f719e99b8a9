#include <algorithm>
#include <cmath>

#include "ccg/ccg.hpp"
#include "common/error.hpp"
#include "problems/recourse.hpp"

namespace roccg::ccg {

std::string_view ToString(MpMode m) { return m == MpMode::kArgmax ? "argmax" : "max"; }

std::string_view ToString(ApMode m) {
  switch (m) {
    case ApMode::kMilp: return "milp";
    case ApMode::kSampling: return "sampling";
    case ApMode::kLpRelax: return "lp-relax";
  }
  return "milp";
}

std::string_view ToString(Termination t) {
  switch (t) {
    case Termination::kEpsilonConverged: return "epsilon-converged";
    case Termination::kMaxIterations: return "max-iterations";
    case Termination::kTimeLimit: return "time-limit";
    case Termination::kStalled: return "stalled";
    case Termination::kInfeasible: return "infeasible";
  }
  return "max-iterations";
}

MpMode ParseMpMode(std::string_view s) {
  if (s == "argmax") return MpMode::kArgmax;
  if (s == "max") return MpMode::kMax;
  throw UsageError("unknown main problem mode '" + std::string(s) + "'");
}

ApMode ParseApMode(std::string_view s) {
  if (s == "milp") return ApMode::kMilp;
  if (s == "sampling") return ApMode::kSampling;
  if (s == "lp-relax") return ApMode::kLpRelax;
  throw UsageError("unknown adversarial mode '" + std::string(s) + "'");
}

bool ScenarioPool::Contains(const Scenario& xi) const {
  for (const Scenario& s : scenarios_) {
    if (s.size() != xi.size()) continue;
    double dist = 0.0;
    for (size_t k = 0; k < s.size(); ++k) dist = std::max(dist, std::abs(s[k] - xi[k]));
    if (dist <= kDedupTol) return true;
  }
  return false;
}

bool ScenarioPool::Add(const Scenario& xi) {
  if (Contains(xi)) return false;
  scenarios_.push_back(xi);
  if (model_ && inst_) {
    embeddings_.push_back(model_->EmbedXi(problems::ScenarioFeatures(*inst_, xi)));
  }
  return true;
}

double PredictedScore(const problems::Instance& inst, const neural::ValueModel& model,
                      const FirstStage& x, std::span<const double> x_embedding,
                      const Scenario& xi, std::span<const double> xi_embedding) {
  double v = model.ValueFromEmbeddings(x_embedding, xi_embedding);
  if (model.target_mode == neural::TargetMode::kSecondOnly) {
    v += problems::FirstStageCost(inst, x, xi) / model.label_scaler.range();
  }
  return v;
}

double PredictedScore(const problems::Instance& inst, const neural::ValueModel& model,
                      const FirstStage& x, const Scenario& xi) {
  return PredictedScore(inst, model, x, model.EmbedX(problems::FirstStageFeatures(inst, x)),
                        xi, model.EmbedXi(problems::ScenarioFeatures(inst, xi)));
}

bool ShouldStop(double pool_best, double ap_value, double epsilon) {
  return !(ap_value >= pool_best + epsilon);
}

nlohmann::json IterationRecord::ToJson() const {
  nlohmann::json j = {{"iteration", iteration},
                      {"mp_obj", mp_obj},
                      {"ap_val", ap_val},
                      {"pool_size", pool_size},
                      {"wall_ms", wall_ms},
                      {"action", action},
                      {"ap_proven", ap_proven}};
  if (lower) j["lower_bound"] = *lower;
  if (upper) j["upper_bound"] = *upper;
  return j;
}

std::string LogToJsonl(const std::vector<IterationRecord>& log) {
  std::string out;
  for (const IterationRecord& r : log) {
    out += r.ToJson().dump();
    out += '\n';
  }
  return out;
}

void MlCcgConfig::Validate() const {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (ap_mode == ApMode::kSampling && samples < 1) {
    throw UsageError("sampling mode needs at least one sample");
  }
  if (!(time_limit_seconds > 0.0)) throw UsageError("time limit must be positive");
  solve.Validate();
}

void CcgConfig::Validate() const {
  if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (!(time_limit_seconds > 0.0)) throw UsageError("time limit must be positive");
  solve.Validate();
}

}  // namespace roccg::ccg
