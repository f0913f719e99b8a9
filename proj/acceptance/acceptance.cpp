// Runs the acceptance checks and prints one PASS/FAIL line per check. Exits
// nonzero when any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ccg/ccg.hpp"
#include "common/io.hpp"
#include "common/random.hpp"
#include "datagen/dataset.hpp"
#include "datagen/sampling.hpp"
#include "embed/embed.hpp"
#include "eval/bench.hpp"
#include "eval/evaluate.hpp"
#include "milp/branch_and_bound.hpp"
#include "neural/serialize.hpp"
#include "neural/trainer.hpp"
#include "pipeline/commands.hpp"
#include "problems/recourse.hpp"

using namespace roccg;
using nlohmann::json;
using problems::Correlation;
using problems::FirstStage;
using problems::Instance;
using problems::Scenario;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Models shared by several checks.
struct Models {
  neural::ValueModel knapsack;
  neural::ValueModel capital;
  double knapsack_mae = 0.0;
  double knapsack_label_std = 0.0;
  double knapsack_train_seconds = 0.0;
};

fs::path WorkDir() {
  const fs::path dir = fs::temp_directory_path() / "roccg_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// The desk knapsack dataset with the default training profile, then a
// capital budgeting model on a dataset of the same shape.
Models TrainModels(const fs::path& work) {
  Models m;
  const std::string kp_data = (work / "kp_data").string();
  const std::string kp_model = (work / "kp_model").string();
  pipeline::RunData({{"out", kp_data}});
  const auto start = Clock::now();
  const json summary = pipeline::RunTrain({{"dataset", kp_data}, {"out", kp_model}});
  m.knapsack_train_seconds = Seconds(start);
  m.knapsack_mae = summary["best_val_mae"].get<double>();
  m.knapsack_label_std = summary["label_std"].get<double>();
  m.knapsack = neural::LoadModel(kp_model + "/model.json");

  const std::string cb_data = (work / "cb_data").string();
  const std::string cb_model = (work / "cb_model").string();
  pipeline::RunData({{"family", "capital_budgeting"}, {"out", cb_data}});
  pipeline::RunTrain({{"dataset", cb_data}, {"out", cb_model}, {"epochs", 200}});
  m.capital = neural::LoadModel(cb_model + "/model.json");
  return m;
}

Instance RandomInstance(problems::Family family, Rng& rng, int n) {
  if (family == problems::Family::kKnapsack) {
    return problems::GenerateKnapsack(n, static_cast<Correlation>(rng.UniformInt(0, 3)),
                                      rng.Next());
  }
  return problems::GenerateCapitalBudgeting(n, rng.Next());
}

// Embedded value network with x and ξ as variables, both pinned; returns
// the largest distance between the MILP output (minimized and maximized)
// and the forward pass.
double EmbeddingGap(const Instance& inst, const neural::ValueModel& vm, const FirstStage& x,
                    const Scenario& xi) {
  const int n = problems::NumItems(inst);
  const int dim = problems::ScenarioDim(inst);
  milp::MilpModel m;
  std::vector<int> xv, xiv;
  for (int i = 0; i < n; ++i) xv.push_back(m.AddBinary("x" + std::to_string(i)));
  const bool knapsack = problems::FamilyOf(inst) == problems::Family::kKnapsack;
  for (int k = 0; k < dim; ++k) {
    xiv.push_back(m.AddContinuous(knapsack ? 0.0 : -1.0, 1.0, "xi" + std::to_string(k)));
  }
  const embed::EmbeddedEncoder ex = embed::EmbedBinaryXEncoder(
      m, vm, xv, problems::FirstStageFeatures(inst, FirstStage(n, 0)),
      problems::FirstStageFeatures(inst, FirstStage(n, 1)), "ex");
  const embed::EmbeddedEncoder exi = embed::EmbedEncoder(
      m, vm.xi_encoder, vm.xi_scaler, problems::ScenarioFeatureExprs(inst, xiv), "exi");
  const embed::EmbeddedValue v = embed::EmbedValueNetwork(m, vm, ex, exi, "v");
  for (int i = 0; i < n; ++i) m.SetVariableBounds(xv[i], x[i], x[i]);
  for (int k = 0; k < dim; ++k) m.SetVariableBounds(xiv[k], xi[k], xi[k]);
  const double forward = vm.PredictScaled(problems::FirstStageFeatures(inst, x),
                                          problems::ScenarioFeatures(inst, xi));
  double gap = 0.0;
  milp::SolveConfig cfg;
  cfg.gap_tol = 1e-12;
  for (milp::ObjSense sense : {milp::ObjSense::kMinimize, milp::ObjSense::kMaximize}) {
    m.SetObjective(milp::LinExpr::Var(v.output), sense);
    const milp::SolveResult r = milp::SolveMilp(m, cfg);
    if (r.status != milp::SolveStatus::kOptimal) return INFINITY;
    gap = std::max(gap, std::abs(r.values[v.output] - forward));
  }
  return gap;
}

Outcome EmbeddingFidelity(const Models& models) {
  Rng rng(101);
  double worst = 0.0;
  int triples = 0;
  for (const neural::ValueModel* vm : {&models.knapsack, &models.capital}) {
    const problems::Family family = problems::ParseFamily(vm->family);
    for (int t = 0; t < 100; ++t) {
      const Instance inst = RandomInstance(family, rng, static_cast<int>(rng.UniformInt(8, 12)));
      const FirstStage x = datagen::SampleFirstStage(inst, rng);
      const Scenario xi = datagen::SampleScenario(inst, rng);
      worst = std::max(worst, EmbeddingGap(inst, *vm, x, xi));
      ++triples;
    }
  }
  return {worst <= 1e-5, "max |delta| = " + Fmt("%.3g", worst) + " scaled over " +
                             std::to_string(triples) + " triples"};
}

Outcome ArgmaxGadget() {
  Rng rng(202);
  int pools = 0, violations = 0, empty = 0;
  for (int t = 0; t < 50; ++t) {
    const int k = static_cast<int>(rng.UniformInt(1, 5));
    std::vector<double> p(k);
    // Coarse values so ties occur.
    for (double& v : p) v = std::round(rng.Uniform(-4, 4) * 2.0) / 2.0;
    const double best = *std::max_element(p.begin(), p.end());
    std::vector<std::vector<double>> scen;
    for (int i = 0; i < k; ++i) scen.push_back({rng.Uniform(0, 1)});
    int feasible = 0;
    for (int j = 0; j < k; ++j) {
      milp::MilpModel m;
      std::vector<milp::LinExpr> preds;
      for (double v : p) preds.emplace_back(v);
      const embed::ArgmaxGadget g = embed::EmbedArgmax(m, preds, scen, -5.0, 5.0, "a");
      for (int i = 0; i < k; ++i) m.SetVariableBounds(g.z[i], i == j, i == j);
      m.SetObjective(milp::LinExpr::Var(g.u), milp::ObjSense::kMinimize);
      const milp::SolveResult r = milp::SolveMilp(m);
      if (!r.has_solution()) continue;
      ++feasible;
      if (p[j] != best || std::abs(r.values[g.xi_a[0]] - scen[j][0]) > 1e-9) ++violations;
    }
    if (feasible == 0) ++empty;
    ++pools;
  }
  return {violations == 0 && empty == 0,
          std::to_string(pools) + " pools, " + std::to_string(violations) +
              " selectors on a non-maximizer, " + std::to_string(empty) + " pools without one"};
}

Outcome ClassicalExactness() {
  double worst_gap = 0.0, worst_time = 0.0;
  for (int t = 0; t < 20; ++t) {
    problems::KnapsackInstance kp =
        problems::GenerateKnapsack(6 + t % 5, static_cast<Correlation>(t % 4), 300 + t);
    kp.budget = 1;
    const auto start = Clock::now();
    const ccg::CcgResult r = ccg::ClassicalCcg(kp, ccg::CcgConfig{});
    worst_time = std::max(worst_time, Seconds(start));
    const eval::BruteForceResult brute = eval::BruteForce2ro(kp);
    const double gap = r.reason == ccg::Termination::kEpsilonConverged
                           ? std::abs(r.objective - brute.value)
                           : INFINITY;
    worst_gap = std::max(worst_gap, gap);
  }
  return {worst_gap <= 1e-6 && worst_time < 60.0,
          "20 instances, max |ccg - brute| = " + Fmt("%.3g", worst_gap) + ", slowest " +
              Fmt("%.2f", worst_time) + " s"};
}

Outcome FiniteTermination(const Models& models) {
  int runs = 0, converged = 0, worst_iterations = 0;
  std::map<std::string, int> reasons;
  auto run = [&](const Instance& inst, const neural::ValueModel& vm, std::uint64_t seed) {
    ccg::MlCcgConfig cfg;
    cfg.seed = seed;
    const ccg::CcgResult r = ccg::MlCcg(inst, vm, cfg);
    ++runs;
    ++reasons[std::string(ccg::ToString(r.reason))];
    worst_iterations = std::max(worst_iterations, r.iterations);
    if (r.reason == ccg::Termination::kEpsilonConverged && r.iterations <= 50) ++converged;
  };
  for (int t = 0; t < 50; ++t) {
    run(problems::GenerateKnapsack(10, static_cast<Correlation>(t % 4), 4000 + t),
        models.knapsack, t);
  }
  for (int t = 0; t < 20; ++t) {
    run(problems::GenerateCapitalBudgeting(10, 5000 + t), models.capital, t);
  }
  std::string detail = std::to_string(converged) + "/" + std::to_string(runs) +
                       " epsilon-converged, most iterations " + std::to_string(worst_iterations);
  for (const auto& [reason, count] : reasons) {
    if (reason != "epsilon-converged") detail += ", " + reason + " " + std::to_string(count);
  }
  return {converged == runs, detail};
}

Outcome GradientCorrectness() {
  Rng rng(505);
  double worst = 0.0;
  int pairs = 0, kinks = 0;
  while (pairs < 100) {
    const problems::Family family =
        pairs % 2 ? problems::Family::kCapitalBudgeting : problems::Family::kKnapsack;
    const std::string name(problems::ToString(family));
    const Instance inst = RandomInstance(family, rng, static_cast<int>(rng.UniformInt(3, 8)));
    std::vector<neural::LabeledSample> samples;
    while (samples.size() < 20) {
      const FirstStage x = datagen::SampleFirstStage(inst, rng);
      const Scenario xi = datagen::SampleScenario(inst, rng);
      const auto label = problems::SecondStageValue(inst, x, xi, neural::TargetMode::kSum);
      if (!label) continue;
      samples.push_back({name, problems::FirstStageFeatures(inst, x),
                         problems::ScenarioFeatures(inst, xi), *label});
    }
    neural::ValueModel vm = neural::ValueModel::Create(
        neural::DefaultArchitecture(name, "desk"), samples[0].features_x.cols,
        samples[0].features_xi.cols, name, neural::TargetMode::kSum, rng.Next());
    const neural::Scalers scalers = neural::FitScalers(samples);
    vm.x_scaler = scalers.x;
    vm.xi_scaler = scalers.xi;
    vm.label_scaler = scalers.label;
    const neural::GradCheckResult r = neural::GradCheck(vm, samples.back(), 1e-6);
    if (r.at_kink || r.checked == 0) {
      ++kinks;
      continue;
    }
    worst = std::max(worst, r.max_rel_error);
    ++pairs;
  }
  return {worst <= 1e-4, "max relative error " + Fmt("%.3g", worst) + " over " +
                             std::to_string(pairs) + " pairs (" + std::to_string(kinks) +
                             " kink draws redrawn)"};
}

Outcome TrainingSignal(const Models& models) {
  const double ratio = models.knapsack_mae / models.knapsack_label_std;
  return {ratio <= 0.15 && models.knapsack_train_seconds < 600.0,
          "best validation MAE " + Fmt("%.3f", models.knapsack_mae) + " = " +
              Fmt("%.3f", ratio) + " x label std, trained in " +
              Fmt("%.0f", models.knapsack_train_seconds) + " s"};
}

struct SuiteRun {
  std::vector<double> argmax_objective;
  std::vector<double> max_objective;
  std::vector<double> brute;
};

SuiteRun RunQualitySuite(const Models& models) {
  SuiteRun s;
  for (int t = 0; t < 20; ++t) {
    const problems::KnapsackInstance kp =
        problems::GenerateKnapsack(10, static_cast<Correlation>(t % 4), 2000 + t);
    for (ccg::MpMode mode : {ccg::MpMode::kArgmax, ccg::MpMode::kMax}) {
      ccg::MlCcgConfig cfg;
      cfg.mp_mode = mode;
      cfg.seed = t;
      const ccg::CcgResult r = ccg::MlCcg(kp, models.knapsack, cfg);
      const double value = r.x.empty() ? INFINITY : eval::EvaluateExact(kp, r.x).value;
      (mode == ccg::MpMode::kArgmax ? s.argmax_objective : s.max_objective).push_back(value);
    }
    s.brute.push_back(eval::BruteForce2ro(kp).value);
  }
  return s;
}

Outcome SolutionQuality(const SuiteRun& s) {
  std::vector<double> re;
  for (std::size_t i = 0; i < s.brute.size(); ++i) {
    re.push_back(eval::ComputeRelativeError(s.brute[i], s.argmax_objective[i]).pct);
  }
  const double median = eval::Quantile(re, 0.5);
  return {median <= 5.0, "median RE " + Fmt("%.2f", median) + "% over " +
                             std::to_string(re.size()) + " instances (max " +
                             Fmt("%.2f", *std::max_element(re.begin(), re.end())) + "%)"};
}

Outcome AblationDirection(const SuiteRun& s) {
  double argmax = 0.0, max = 0.0;
  for (std::size_t i = 0; i < s.brute.size(); ++i) {
    argmax += s.argmax_objective[i] / static_cast<double>(s.brute.size());
    max += s.max_objective[i] / static_cast<double>(s.brute.size());
  }
  return {argmax <= max, "mean exact objective argmax " + Fmt("%.3f", argmax) + " vs max " +
                             Fmt("%.3f", max)};
}

double GridMax(const Instance& inst, const neural::ValueModel& vm, const FirstStage& x) {
  const std::vector<double> ex = vm.EmbedX(problems::FirstStageFeatures(inst, x));
  double best = -INFINITY;
  Scenario xi(4);
  for (int a = 0; a <= 20; ++a) {
    for (int b = 0; b <= 20; ++b) {
      for (int c = 0; c <= 20; ++c) {
        for (int d = 0; d <= 20; ++d) {
          xi = {-1.0 + 0.1 * a, -1.0 + 0.1 * b, -1.0 + 0.1 * c, -1.0 + 0.1 * d};
          best = std::max(best,
                          ccg::PredictedScore(inst, vm, x, ex, xi,
                                              vm.EmbedXi(problems::ScenarioFeatures(inst, xi))));
        }
      }
    }
  }
  return best;
}

Outcome AdversarialDominance(const Models& models) {
  Rng rng(909);
  std::vector<std::pair<std::string, neural::ValueModel>> test_models = {
      {"trained knapsack", models.knapsack}, {"trained capital budgeting", models.capital}};
  // Untrained networks with scalers fitted on real samples.
  for (int t = 0; t < 4; ++t) {
    const problems::Family family =
        t % 2 ? problems::Family::kCapitalBudgeting : problems::Family::kKnapsack;
    const std::string name(problems::ToString(family));
    const Instance inst = RandomInstance(family, rng, 8);
    std::vector<neural::LabeledSample> samples;
    const neural::TargetMode mode = t < 2 ? neural::TargetMode::kSum : neural::TargetMode::kSecondOnly;
    while (samples.size() < 50) {
      const FirstStage x = datagen::SampleFirstStage(inst, rng);
      const Scenario xi = datagen::SampleScenario(inst, rng);
      const auto label = problems::SecondStageValue(inst, x, xi, mode);
      if (!label) continue;
      samples.push_back({name, problems::FirstStageFeatures(inst, x),
                         problems::ScenarioFeatures(inst, xi), *label});
    }
    neural::ValueModel vm = neural::ValueModel::Create(
        neural::DefaultArchitecture(name, "desk"), samples[0].features_x.cols,
        samples[0].features_xi.cols, name, mode, 900 + t);
    const neural::Scalers scalers = neural::FitScalers(samples);
    vm.x_scaler = scalers.x;
    vm.xi_scaler = scalers.xi;
    vm.label_scaler = scalers.label;
    test_models.emplace_back("random " + name + " " + std::string(neural::ToString(mode)), vm);
  }

  double worst_sampling = -INFINITY, worst_grid = -INFINITY;
  int checks = 0, grids = 0;
  for (const auto& [label, vm] : test_models) {
    const problems::Family family = problems::ParseFamily(vm.family);
    for (int t = 0; t < 5; ++t) {
      const Instance inst = RandomInstance(family, rng, static_cast<int>(rng.UniformInt(8, 10)));
      const FirstStage x = datagen::SampleFirstStage(inst, rng);
      ccg::AdversarialConfig milp_cfg;
      const double milp_value = ccg::SolveAdversarial(inst, vm, x, milp_cfg).value;
      ccg::AdversarialConfig sample_cfg;
      sample_cfg.mode = ccg::ApMode::kSampling;
      sample_cfg.samples = 1000;
      sample_cfg.seed = rng.Next();
      const double sampled = ccg::SolveAdversarial(inst, vm, x, sample_cfg).value;
      worst_sampling = std::max(worst_sampling, sampled - milp_value);
      ++checks;
      if (problems::ScenarioDim(inst) == 4 && t < 2) {
        worst_grid = std::max(worst_grid, GridMax(inst, vm, x) - milp_value);
        ++grids;
      }
    }
  }
  return {worst_sampling <= 1e-6 && worst_grid <= 1e-5,
          std::to_string(test_models.size()) + " models: max(sampling - milp) " +
              Fmt("%.3g", worst_sampling) + " over " + std::to_string(checks) +
              " checks, max(grid - milp) " + Fmt("%.3g", worst_grid) + " over " +
              std::to_string(grids) + " 21^4 grids"};
}

// Every regular file below `dir` with its bytes.
std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), dir).string()] = ReadFile(entry.path().string());
    }
  }
  return files;
}

Outcome Determinism(const fs::path& work) {
  const fs::path root = work / "determinism";
  const std::string g = (root / "gen").string(), cg = (root / "cb_gen").string();
  const std::string d = (root / "data").string(), m = (root / "model").string();
  struct Step {
    std::string command;
    json config;
    int threads;
  };
  std::vector<Step> steps = {
      {"gen", {{"count", 3}, {"n_min", 6}, {"n_max", 8}, {"seed", 1}, {"out", g}}, 1},
      {"gen",
       {{"family", "capital_budgeting"}, {"count", 2}, {"n_min", 5}, {"n_max", 5},
        {"seed", 2}, {"out", cg}},
       1},
      {"data",
       {{"instances", 6}, {"decisions", 4}, {"scenarios", 5}, {"n_min", 6}, {"n_max", 8},
        {"seed", 3}, {"out", d}},
       2},
      {"train", {{"dataset", d}, {"epochs", 30}, {"seed", 4}, {"out", m}}, 1},
  };
  const std::string model = m + "/model.json";
  // Steps after gen need its outputs, so the list is run in order twice.
  auto run_all = [&](std::vector<Step>& list) {
    for (Step& s : list) pipeline::RunCommand(s.command, s.config, s.threads);
  };
  try {
    run_all(steps);
    const json index = ReadJsonFile(g + "/index.json");
    const std::string inst = g + "/" + index["instances"][0]["file"].get<std::string>();
    std::vector<Step> more = {
        {"solve", {{"instance", inst}, {"model", model}, {"out", (root / "s_ml").string()}}, 1},
        {"solve", {{"instance", inst}, {"method", "ccg"}, {"out", (root / "s_ccg").string()}}, 1},
        {"solve",
         {{"instance", inst}, {"method", "brute"}, {"out", (root / "s_brute").string()}},
         1},
        {"bench",
         {{"instances", g},
          {"methods", {"ml-ccg", "ml-ccg-max", "ml-ccg-sampling", "ml-ccg-lp", "ccg", "brute"}},
          {"model", model},
          {"out", (root / "bench").string()}},
         2},
        {"bench",
         {{"instances", cg}, {"methods", {"brute"}}, {"eval_samples", 500},
          {"out", (root / "cb_bench").string()}},
         2},
    };
    run_all(more);
    steps.insert(steps.end(), more.begin(), more.end());
    const auto before = Snapshot(root);
    run_all(steps);
    const auto after = Snapshot(root);
    std::vector<std::string> differing;
    for (const auto& [name, bytes] : before) {
      auto it = after.find(name);
      if (it == after.end() || it->second != bytes) differing.push_back(name);
    }
    if (after.size() != before.size()) differing.push_back("(file set)");
    std::string detail = std::to_string(steps.size()) + " commands, " +
                         std::to_string(before.size()) + " artifacts compared";
    for (const std::string& f : differing) detail += ", differs: " + f;
    return {differing.empty(), detail};
  } catch (const std::exception& e) {
    return {false, std::string("command failed: ") + e.what()};
  }
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const fs::path work = WorkDir();
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                Seconds(t0));
    std::fflush(stdout);
  };

  Models models;
  bool trained = false;
  std::string train_error;
  try {
    models = TrainModels(work);
    trained = true;
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  auto needs_models = [&](const std::function<Outcome()>& check) {
    return [&, check]() -> Outcome {
      if (!trained) return {false, "model training failed: " + train_error};
      return check();
    };
  };

  report(1, "embedded network fidelity", needs_models([&] { return EmbeddingFidelity(models); }));
  report(2, "argmax gadget", ArgmaxGadget);
  report(3, "classical ccg exactness", ClassicalExactness);
  report(4, "finite termination", needs_models([&] { return FiniteTermination(models); }));
  report(5, "gradient correctness", GradientCorrectness);
  report(6, "training signal", needs_models([&] { return TrainingSignal(models); }));
  SuiteRun suite;
  bool suite_ok = false;
  std::string suite_error;
  if (trained) {
    try {
      suite = RunQualitySuite(models);
      suite_ok = true;
    } catch (const std::exception& e) {
      suite_error = e.what();
    }
  }
  auto needs_suite = [&](const std::function<Outcome()>& check) {
    return [&, check]() -> Outcome {
      if (!suite_ok) {
        return {false, "suite failed: " + (trained ? suite_error : "model training failed")};
      }
      return check();
    };
  };
  report(7, "solution quality", needs_suite([&] { return SolutionQuality(suite); }));
  report(8, "ablation directionality", needs_suite([&] { return AblationDirection(suite); }));
  report(9, "adversarial dominance", needs_models([&] { return AdversarialDominance(models); }));
  report(10, "determinism", [&] { return Determinism(work); });

  std::printf("%d/10 passed in %.0f s\n", 10 - failures, Seconds(start));
  return failures == 0 ? 0 : 1;
}
