#include "pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <type_traits>
#include <variant>

#include "ccg/ccg.hpp"
#include "common/error.hpp"
#include "common/io.hpp"
#include "common/parallel.hpp"
#include "common/random.hpp"
#include "datagen/dataset.hpp"
#include "datagen/sampling.hpp"
#include "eval/bench.hpp"
#include "eval/evaluate.hpp"
#include "neural/serialize.hpp"
#include "neural/trainer.hpp"
#include "problems/recourse.hpp"

namespace roccg::pipeline {

using nlohmann::json;
using problems::Family;
using problems::FirstStage;
using problems::Instance;
using problems::Scenario;
namespace fs = std::filesystem;

namespace {

inline constexpr int kIndexSchemaVersion = 1;
inline constexpr int kSolutionSchemaVersion = 1;
inline constexpr std::uint64_t kEvalPoolTag = 0xe7a1;
inline constexpr std::uint64_t kSplitTag = 0x5b17;

// Typed reads with defaults; remembers every value it hands out so the
// resolved document can be written back.
class Config {
 public:
  Config(const json& doc, std::string command) : doc_(doc), command_(std::move(command)) {
    if (!doc_.is_object()) throw UsageError(command_ + ": config must be a JSON object");
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    used_.insert(key);
    T value = std::move(fallback);
    if (doc_.contains(key) && !doc_[key].is_null()) value = Convert<T>(key, doc_[key]);
    resolved_[key] = value;
    return value;
  }

  template <typename T>
  T Require(const std::string& key) {
    used_.insert(key);
    if (!doc_.contains(key) || doc_[key].is_null()) {
      throw UsageError(command_ + ": missing required setting '" + key + "'");
    }
    T value = Convert<T>(key, doc_[key]);
    resolved_[key] = value;
    return value;
  }

  std::optional<std::string> Optional(const std::string& key) {
    used_.insert(key);
    if (!doc_.contains(key) || doc_[key].is_null()) return std::nullopt;
    std::string value = Convert<std::string>(key, doc_[key]);
    resolved_[key] = value;
    return value;
  }

  void Finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!used_.count(key)) throw UsageError(command_ + ": unknown setting '" + key + "'");
    }
  }

  json Resolved() const {
    json doc = resolved_;
    doc["command"] = command_;
    doc["schema_version"] = kRunConfigSchemaVersion;
    return doc;
  }

 private:
  template <typename T>
  T Convert(const std::string& key, const json& v) const {
    bool ok;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_unsigned_v<T>) {
      ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    } else {
      ok = v.is_array() && std::all_of(v.begin(), v.end(),
                                       [](const json& e) { return e.is_string(); });
    }
    if (!ok) throw UsageError(command_ + ": setting '" + key + "' has the wrong type");
    return v.get<T>();
  }

  json doc_;
  std::string command_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

// Bad enum values in a config are usage errors, whatever the parser throws.
template <typename Fn>
auto AsUsage(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void EnsureDirectory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) {
    throw InputError("cannot create output directory '" + path + "'" +
                     (ec ? ": " + ec.message() : ""));
  }
}

std::string Join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void WriteRunConfig(const std::string& out, const Config& config) {
  WriteJsonFile(Join(out, "run_config.json"), config.Resolved());
}

double ElapsedMs(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

struct SolverSettings {
  ccg::MlCcgConfig ml;
  ccg::CcgConfig classical;
  int eval_samples = 10000;
  std::uint64_t seed = 0;
  bool record_timing = false;
};

SolverSettings ReadSolverSettings(Config& c, bool with_modes) {
  SolverSettings s;
  s.ml.epsilon = c.Get<double>("epsilon", s.ml.epsilon);
  s.ml.max_iterations = c.Get<int>("max_iterations", s.ml.max_iterations);
  if (with_modes) {
    s.ml.mp_mode = AsUsage([&] { return ccg::ParseMpMode(c.Get<std::string>("mp_mode", "argmax")); });
    s.ml.ap_mode = AsUsage([&] { return ccg::ParseApMode(c.Get<std::string>("ap_mode", "milp")); });
  }
  s.ml.samples = c.Get<int>("samples", s.ml.samples);
  s.ml.time_limit_seconds = c.Get<double>("time_limit_seconds", s.ml.time_limit_seconds);
  s.ml.solve.time_limit_seconds =
      c.Get<double>("milp_time_limit_seconds", s.ml.solve.time_limit_seconds);
  s.classical.max_iterations =
      c.Get<int>("ccg_max_iterations", s.classical.max_iterations);
  s.classical.time_limit_seconds = s.ml.time_limit_seconds;
  s.classical.solve.time_limit_seconds = s.ml.solve.time_limit_seconds;
  s.eval_samples = c.Get<int>("eval_samples", s.eval_samples);
  s.seed = c.Get<std::uint64_t>("seed", 0);
  s.record_timing = c.Get<bool>("record_timing", false);
  s.ml.seed = s.seed;
  s.ml.record_timing = s.record_timing;
  s.classical.record_timing = s.record_timing;
  if (s.eval_samples < 1) throw UsageError("eval_samples must be >= 1");
  s.ml.Validate();
  s.classical.Validate();
  return s;
}

std::vector<Scenario> FreshSamples(const Instance& inst, int count, std::uint64_t seed) {
  Rng rng(MixSeed(seed, kEvalPoolTag));
  std::vector<Scenario> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) out.push_back(datagen::SampleScenario(inst, rng));
  return out;
}

void CheckModelFamily(const neural::ValueModel& model, Family family) {
  if (model.family != problems::ToString(family)) {
    throw UsageError("model was trained for '" + model.family + "' but the instances are '" +
                     std::string(problems::ToString(family)) + "'");
  }
  model.CheckReady();
}

[[noreturn]] void RejectClassicalOnCapitalBudgeting() {
  throw UsageError(
      "method 'ccg' is not available for capital budgeting: the recourse has integer "
      "variables, so the exact adversarial problem of classical CCG is intractable");
}

std::vector<Instance> ReadIndex(const std::string& dir) {
  const json index = ReadJsonFile(Join(dir, "index.json"));
  CheckSchemaVersion(index, kIndexSchemaVersion, "instance index");
  const json entries = RequireField<json>(index, "instances", "instance index");
  if (!entries.is_array()) throw InputError("instance index: field 'instances' is not a list");
  std::vector<Instance> out;
  for (const json& e : entries) {
    out.push_back(problems::LoadInstance(
        Join(dir, RequireField<std::string>(e, "file", "instance index entry"))));
  }
  return out;
}

json SolutionJson(const Instance& inst, const std::string& method, const FirstStage& x,
                  double objective, std::optional<double> evaluated,
                  const std::string& termination, int iterations, int pool_size) {
  json doc = {{"schema_version", kSolutionSchemaVersion},
              {"instance_id", problems::IdOf(inst)},
              {"method", method},
              {"x", x},
              {"objective", JsonNumber(objective)},
              {"termination", termination},
              {"iterations", iterations},
              {"pool_size", pool_size}};
  doc["evaluated_objective"] = evaluated ? JsonNumber(*evaluated) : json();
  return doc;
}

void CheckMethod(const std::string& method) {
  if (method != "ml-ccg" && method != "ccg" && method != "brute") {
    throw UsageError("solve: unknown method '" + method + "' (expected ml-ccg, ccg or brute)");
  }
}

void CheckSolveRequest(const Instance& inst, const neural::ValueModel* model,
                       const std::string& method) {
  CheckMethod(method);
  if (method == "ccg" && problems::FamilyOf(inst) != Family::kKnapsack) {
    RejectClassicalOnCapitalBudgeting();
  }
  if (method == "ml-ccg") {
    if (!model) throw UsageError("solve: method 'ml-ccg' needs a model");
    CheckModelFamily(*model, problems::FamilyOf(inst));
  }
}

json Solve(const Instance& inst, const neural::ValueModel* model, const std::string& method,
           const SolverSettings& s, std::string* log) {
  const auto start = std::chrono::steady_clock::now();
  const auto* kp = std::get_if<problems::KnapsackInstance>(&inst);
  json solution;
  if (method == "brute") {
    std::vector<Scenario> pool;
    if (!kp) pool = FreshSamples(inst, s.eval_samples, s.seed);
    const eval::BruteForceResult r = eval::BruteForce2ro(inst, pool);
    solution = SolutionJson(inst, method, r.x, r.value, r.value, "optimal", 0,
                            static_cast<int>(pool.size()));
    if (log) log->clear();
  } else {
    const ccg::CcgResult r =
        method == "ccg" ? ccg::ClassicalCcg(*kp, s.classical) : ccg::MlCcg(inst, *model, s.ml);
    std::optional<double> evaluated;
    if (!r.x.empty()) {
      if (kp) {
        evaluated = eval::EvaluateExact(*kp, r.x).value;
      } else {
        std::vector<Scenario> pool = r.pool;
        for (Scenario& xi : FreshSamples(inst, s.eval_samples, s.seed)) pool.push_back(std::move(xi));
        evaluated = eval::EvaluateSampled(inst, r.x, pool).value;
      }
    }
    solution = SolutionJson(inst, method, r.x, r.objective, evaluated,
                            std::string(ccg::ToString(r.reason)), r.iterations,
                            static_cast<int>(r.pool.size()));
    if (log) *log = ccg::LogToJsonl(r.log);
  }
  if (s.record_timing) solution["wall_ms"] = ElapsedMs(start);
  return solution;
}

// One bench method on one instance, before the common evaluation.
struct MethodRun {
  FirstStage x;
  std::vector<Scenario> pool;
  std::string termination;
  int iterations = 0;
  double wall_ms = 0.0;
};

struct BenchMethod {
  std::string name;
  bool learned = true;
  ccg::MpMode mp = ccg::MpMode::kArgmax;
  ccg::ApMode ap = ccg::ApMode::kMilp;
};

BenchMethod ParseBenchMethod(const std::string& name) {
  if (name == "ml-ccg") return {name};
  if (name == "ml-ccg-max") return {name, true, ccg::MpMode::kMax};
  if (name == "ml-ccg-sampling") return {name, true, ccg::MpMode::kArgmax, ccg::ApMode::kSampling};
  if (name == "ml-ccg-lp") return {name, true, ccg::MpMode::kArgmax, ccg::ApMode::kLpRelax};
  if (name == "ccg" || name == "brute") return {name, false};
  throw UsageError("unknown bench method '" + name +
                   "' (expected ml-ccg, ml-ccg-max, ml-ccg-sampling, ml-ccg-lp, ccg or brute)");
}

MethodRun RunMlMethod(const Instance& inst, const neural::ValueModel& model,
                      ccg::MlCcgConfig config) {
  const auto start = std::chrono::steady_clock::now();
  const ccg::CcgResult r = ccg::MlCcg(inst, model, config);
  return {r.x, r.pool, std::string(ccg::ToString(r.reason)), r.iterations,
          config.record_timing ? ElapsedMs(start) : 0.0};
}

}  // namespace

json RunGen(const json& config) {
  Config c(config, "gen");
  datagen::DatasetSpec spec;
  spec.family = AsUsage([&] { return problems::ParseFamily(c.Get<std::string>("family", "knapsack")); });
  const int count = c.Get<int>("count", 10);
  spec.n_min = c.Get<int>("n_min", 10);
  spec.n_max = c.Get<int>("n_max", 10);
  spec.seed = c.Get<std::uint64_t>("seed", 0);
  const std::string out = c.Require<std::string>("out");
  c.Finish();
  if (count < 0) throw UsageError("gen: count must be >= 0");
  if (spec.n_min < 1 || spec.n_max < spec.n_min) {
    throw UsageError("gen: size range needs 1 <= n_min <= n_max");
  }

  EnsureDirectory(out);
  json entries = json::array();
  for (int i = 0; i < count; ++i) {
    const Instance inst = datagen::SpecInstance(spec, i);
    const std::string file = problems::IdOf(inst) + ".json";
    problems::SaveInstance(inst, Join(out, file));
    entries.push_back({{"id", problems::IdOf(inst)}, {"file", file}, {"n", problems::NumItems(inst)}});
  }
  WriteRunConfig(out, c);
  WriteJsonFile(Join(out, "index.json"), {{"schema_version", kIndexSchemaVersion},
                                          {"family", problems::ToString(spec.family)},
                                          {"instances", entries}});
  return {{"instances", count}, {"index", Join(out, "index.json")}};
}

json RunData(const json& config, int threads) {
  Config c(config, "data");
  datagen::DatasetSpec spec;
  spec.family = AsUsage([&] { return problems::ParseFamily(c.Get<std::string>("family", "knapsack")); });
  spec.instances = c.Get<int>("instances", spec.instances);
  spec.decisions = c.Get<int>("decisions", spec.decisions);
  spec.scenarios = c.Get<int>("scenarios", spec.scenarios);
  spec.n_min = c.Get<int>("n_min", spec.n_min);
  spec.n_max = c.Get<int>("n_max", spec.n_max);
  spec.target_mode =
      AsUsage([&] { return neural::ParseTargetMode(c.Get<std::string>("target_mode", "sum")); });
  spec.seed = c.Get<std::uint64_t>("seed", 0);
  const std::string out = c.Require<std::string>("out");
  c.Finish();
  spec.Validate();

  EnsureDirectory(out);
  const datagen::Dataset data = datagen::BuildDataset(spec, threads);
  WriteRunConfig(out, c);
  datagen::WriteDataset(data, Join(out, "dataset.jsonl"), Join(out, "manifest.json"));
  return data.manifest.ToJson();
}

json RunTrain(const json& config) {
  Config c(config, "train");
  const std::string dataset = c.Require<std::string>("dataset");
  const std::string profile = c.Get<std::string>("profile", "desk");
  neural::TrainConfig tc;
  tc.epochs = c.Get<int>("epochs", tc.epochs);
  tc.batch_size = c.Get<int>("batch_size", tc.batch_size);
  tc.learning_rate = c.Get<double>("learning_rate", tc.learning_rate);
  tc.validation_interval = c.Get<int>("validation_interval", tc.validation_interval);
  const double fraction = c.Get<double>("validation_fraction", 0.2);
  tc.seed = c.Get<std::uint64_t>("seed", 0);
  const std::string out = c.Require<std::string>("out");
  c.Finish();
  tc.Validate();
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw UsageError("train: validation_fraction must lie in [0, 1)");
  }

  const json manifest = ReadJsonFile(Join(dataset, "manifest.json"));
  CheckSchemaVersion(manifest, datagen::kDatasetSchemaVersion, "dataset manifest");
  const datagen::DatasetSpec spec =
      datagen::DatasetSpec::FromJson(RequireField<json>(manifest, "spec", "dataset manifest"));
  const double label_std = RequireField<double>(manifest, "label_std", "dataset manifest");
  const std::vector<neural::LabeledSample> samples =
      datagen::ToSamples(datagen::ReadDatasetRecords(Join(dataset, "dataset.jsonl")));
  if (samples.empty()) throw InputError("train: dataset '" + dataset + "' has no records");

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(MixSeed(tc.seed, kSplitTag));
  rng.Shuffle(order);
  const std::size_t n_val =
      static_cast<std::size_t>(fraction * static_cast<double>(samples.size()));
  std::vector<neural::LabeledSample> train, validation;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_val ? validation : train).push_back(samples[order[k]]);
  }

  const std::string family(problems::ToString(spec.family));
  const neural::Architecture arch =
      AsUsage([&] { return neural::DefaultArchitecture(family, profile); });
  const neural::ValueModel initial = neural::ValueModel::Create(
      arch, samples[0].features_x.cols,
      samples[0].features_xi.cols, family, spec.target_mode, tc.seed);
  EnsureDirectory(out);
  const neural::TrainResult result = neural::TrainValueModel(initial, train, validation, tc);

  std::string curve = "epoch,train_mse,train_mae,val_mae\n";
  for (const neural::CurvePoint& p : result.curve) {
    curve += std::to_string(p.epoch) + ',' + FormatDouble(p.train_mse) + ',' +
             FormatDouble(p.train_mae) + ',' + FormatDouble(p.val_mae) + '\n';
  }
  const json summary = {{"best_epoch", result.best_epoch},
                        {"best_val_mae", JsonNumber(result.best_val_mae)},
                        {"label_std", label_std},
                        {"mae_over_std", JsonNumber(label_std > 0.0 ? result.best_val_mae / label_std
                                                                    : 0.0)},
                        {"train_records", train.size()},
                        {"validation_records", validation.size()}};
  WriteRunConfig(out, c);
  WriteFileAtomic(Join(out, "curve.csv"), curve);
  WriteJsonFile(Join(out, "summary.json"), summary);
  neural::SaveModel(result.model, Join(out, "model.json"));
  return summary;
}

json RunSolve(const json& config) {
  Config c(config, "solve");
  const std::string instance_path = c.Require<std::string>("instance");
  const std::string method = c.Get<std::string>("method", "ml-ccg");
  const std::optional<std::string> model_path = c.Optional("model");
  const SolverSettings s = ReadSolverSettings(c, true);
  const std::string out = c.Require<std::string>("out");
  c.Finish();
  CheckMethod(method);
  const Instance inst = problems::LoadInstance(instance_path);
  std::optional<neural::ValueModel> model;
  if (method == "ml-ccg") {
    if (!model_path) throw UsageError("solve: method 'ml-ccg' needs a model");
    model = neural::LoadModel(*model_path);
  }
  CheckSolveRequest(inst, model ? &*model : nullptr, method);
  EnsureDirectory(out);

  std::string log;
  const json solution = Solve(inst, model ? &*model : nullptr, method, s, &log);

  WriteRunConfig(out, c);
  WriteFileAtomic(Join(out, "log.jsonl"), log);
  WriteJsonFile(Join(out, "solution.json"), solution);
  return solution;
}

json RunBench(const json& config, int threads) {
  Config c(config, "bench");
  const std::string dir = c.Require<std::string>("instances");
  const std::vector<std::string> names =
      c.Get<std::vector<std::string>>("methods", {"ml-ccg", "brute"});
  const std::optional<std::string> model_path = c.Optional("model");
  const std::optional<std::string> dataset_path = c.Optional("dataset");
  const SolverSettings s = ReadSolverSettings(c, false);
  const std::string out = c.Require<std::string>("out");
  c.Finish();

  if (names.empty()) throw UsageError("bench: no methods given");
  std::vector<BenchMethod> methods;
  bool any_learned = false;
  for (const std::string& name : names) {
    if (std::count(names.begin(), names.end(), name) > 1) {
      throw UsageError("bench: method '" + name + "' is listed twice");
    }
    methods.push_back(ParseBenchMethod(name));
    any_learned = any_learned || methods.back().learned;
  }
  std::optional<neural::ValueModel> model;
  if (any_learned) {
    if (!model_path) throw UsageError("bench: the ml-ccg methods need a model");
    model = neural::LoadModel(*model_path);
  }

  const std::vector<Instance> instances = ReadIndex(dir);
  std::vector<Scenario> dataset_pool;
  if (dataset_path) {
    for (datagen::DatasetRecord& rec :
         datagen::ReadDatasetRecords(Join(*dataset_path, "dataset.jsonl"))) {
      dataset_pool.push_back(std::move(rec.xi));
    }
  }
  for (const Instance& inst : instances) {
    const Family family = problems::FamilyOf(inst);
    for (const BenchMethod& m : methods) {
      if (m.name == "ccg" && family != Family::kKnapsack) RejectClassicalOnCapitalBudgeting();
      if (m.name == "brute" && problems::NumItems(inst) > eval::kBruteForceLimit) {
        throw UsageError("bench: brute force is limited to n <= " +
                         std::to_string(eval::kBruteForceLimit) + ", instance '" +
                         problems::IdOf(inst) + "' has n = " +
                         std::to_string(problems::NumItems(inst)));
      }
    }
    if (model) CheckModelFamily(*model, family);
  }
  EnsureDirectory(out);

  const std::size_t m_count = methods.size();
  std::vector<eval::BenchRow> rows(instances.size() * m_count);
  std::vector<json> solutions(rows.size());
  ParallelFor(instances.size(), threads, [&](std::size_t i) {
    const Instance& inst = instances[i];
    const auto* kp = std::get_if<problems::KnapsackInstance>(&inst);
    ccg::MlCcgConfig base = s.ml;
    base.seed = MixSeed(s.seed, i);

    std::vector<std::optional<MethodRun>> runs(m_count);
    for (std::size_t k = 0; k < m_count; ++k) {
      const BenchMethod& m = methods[k];
      if (m.learned) {
        ccg::MlCcgConfig cfg = base;
        cfg.mp_mode = m.mp;
        cfg.ap_mode = m.ap;
        runs[k] = RunMlMethod(inst, *model, cfg);
      } else if (m.name == "ccg") {
        const auto start = std::chrono::steady_clock::now();
        const ccg::CcgResult r = ccg::ClassicalCcg(*kp, s.classical);
        runs[k] = MethodRun{r.x, r.pool, std::string(ccg::ToString(r.reason)), r.iterations,
                            s.record_timing ? ElapsedMs(start) : 0.0};
      }
    }

    // Capital budgeting is scored over one shared pool per instance.
    std::vector<Scenario> pool;
    if (!kp) {
      pool = dataset_pool;
      for (const auto& run : runs) {
        if (run) pool.insert(pool.end(), run->pool.begin(), run->pool.end());
      }
      for (Scenario& xi : FreshSamples(inst, s.eval_samples, MixSeed(s.seed, i))) {
        pool.push_back(std::move(xi));
      }
    }
    for (std::size_t k = 0; k < m_count; ++k) {
      if (!runs[k]) {
        const auto start = std::chrono::steady_clock::now();
        const eval::BruteForceResult r = eval::BruteForce2ro(inst, pool);
        runs[k] = MethodRun{r.x, {}, "optimal", 0, s.record_timing ? ElapsedMs(start) : 0.0};
      }
      const MethodRun& run = *runs[k];
      double objective = std::numeric_limits<double>::infinity();
      if (!run.x.empty()) {
        objective = kp ? eval::EvaluateExact(*kp, run.x).value
                       : eval::EvaluateSampled(inst, run.x, pool).value;
      }
      eval::BenchRow& row = rows[i * m_count + k];
      row.instance_id = problems::IdOf(inst);
      row.method = methods[k].name;
      row.objective = objective;
      row.wall_ms = run.wall_ms;
      solutions[i * m_count + k] = {{"instance_id", row.instance_id},
                                    {"method", row.method},
                                    {"x", run.x},
                                    {"objective", JsonNumber(objective)},
                                    {"termination", run.termination},
                                    {"iterations", run.iterations}};
    }
  });

  const eval::BenchReport report = eval::BuildReport(std::move(rows), names);
  json summary = report.SummaryJson();
  summary["schema_version"] = kRunConfigSchemaVersion;
  summary["instances"] = instances.size();
  std::string solutions_jsonl;
  for (const json& j : solutions) solutions_jsonl += j.dump() + '\n';
  WriteRunConfig(out, c);
  WriteFileAtomic(Join(out, "solutions.jsonl"), solutions_jsonl);
  WriteJsonFile(Join(out, "summary.json"), summary);
  WriteFileAtomic(Join(out, "report.csv"), report.ToCsv());
  return summary;
}

json SolveLoaded(const Instance& inst, const neural::ValueModel* model,
                 const std::string& method, const json& settings, std::string* log) {
  Config c(settings, "solve");
  const SolverSettings s = ReadSolverSettings(c, true);
  c.Finish();
  CheckSolveRequest(inst, model, method);
  return Solve(inst, model, method, s, log);
}

json RunCommand(const std::string& command, const json& config, int threads) {
  if (command == "gen") return RunGen(config);
  if (command == "data") return RunData(config, threads);
  if (command == "train") return RunTrain(config);
  if (command == "solve") return RunSolve(config);
  if (command == "bench") return RunBench(config, threads);
  throw UsageError("unknown command '" + command + "' (expected gen, data, train, solve or bench)");
}

}  // namespace roccg::pipeline
