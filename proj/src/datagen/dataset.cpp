#include "datagen/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/parallel.hpp"
#include "common/random.hpp"
#include "datagen/sampling.hpp"
#include "problems/recourse.hpp"

namespace roccg::datagen {

using nlohmann::json;
using problems::Family;

void DatasetSpec::Validate() const {
  if (instances < 1 || decisions < 1 || scenarios < 1) {
    throw UsageError("dataset counts (instances, decisions, scenarios) must be >= 1");
  }
  if (n_min < 1 || n_max < n_min) {
    throw UsageError("dataset size range needs 1 <= n_min <= n_max");
  }
}

json DatasetSpec::ToJson() const {
  return {{"family", problems::ToString(family)},
          {"instances", instances},
          {"decisions", decisions},
          {"scenarios", scenarios},
          {"n_min", n_min},
          {"n_max", n_max},
          {"target_mode", neural::ToString(target_mode)},
          {"seed", seed}};
}

DatasetSpec DatasetSpec::FromJson(const json& doc) {
  DatasetSpec s;
  const std::string ctx = "dataset spec";
  s.family = problems::ParseFamily(RequireField<std::string>(doc, "family", ctx));
  s.instances = RequireField<int>(doc, "instances", ctx);
  s.decisions = RequireField<int>(doc, "decisions", ctx);
  s.scenarios = RequireField<int>(doc, "scenarios", ctx);
  s.n_min = RequireField<int>(doc, "n_min", ctx);
  s.n_max = RequireField<int>(doc, "n_max", ctx);
  s.target_mode =
      neural::ParseTargetMode(RequireField<std::string>(doc, "target_mode", ctx));
  s.seed = RequireField<std::uint64_t>(doc, "seed", ctx);
  return s;
}

problems::Instance SpecInstance(const DatasetSpec& spec, int index) {
  const std::uint64_t seed = MixSeed(spec.seed, static_cast<std::uint64_t>(index));
  Rng rng(seed);
  const int n = static_cast<int>(rng.UniformInt(spec.n_min, spec.n_max));
  if (spec.family == Family::kKnapsack) {
    return problems::GenerateKnapsack(n, static_cast<problems::Correlation>(index % 4),
                                      seed);
  }
  return problems::GenerateCapitalBudgeting(n, seed);
}

json DatasetManifest::ToJson() const {
  return {{"schema_version", kDatasetSchemaVersion},
          {"spec", spec.ToJson()},
          {"records", records},
          {"dropped_infeasible", dropped_infeasible},
          {"label_min", label_min},
          {"label_max", label_max},
          {"label_mean", label_mean},
          {"label_std", label_std},
          {"instance_seeds", instance_seeds}};
}

namespace {

json MatrixToJson(const neural::Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

neural::Matrix MatrixFromJson(const json& doc, const std::string& field) {
  const auto rows = doc.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw InputError("field '" + field + "' has no rows");
  neural::Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) {
      throw InputError("field '" + field + "' has ragged rows");
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(static_cast<int>(r)).begin());
  }
  return m;
}

}  // namespace

Dataset BuildDataset(const DatasetSpec& spec, int threads) {
  spec.Validate();
  std::vector<problems::Instance> instances;
  Dataset data;
  data.manifest.spec = spec;
  for (int i = 0; i < spec.instances; ++i) {
    instances.push_back(SpecInstance(spec, i));
    data.manifest.instance_seeds.push_back(
        MixSeed(spec.seed, static_cast<std::uint64_t>(i)));
  }
  const std::size_t per_instance =
      static_cast<std::size_t>(spec.decisions) * spec.scenarios;
  const std::size_t total = per_instance * spec.instances;
  std::vector<std::optional<DatasetRecord>> slots(total);
  ParallelFor(total, threads, [&](std::size_t t) {
    const std::size_t i = t / per_instance;
    const std::size_t d = (t % per_instance) / spec.scenarios;
    const std::size_t s = t % spec.scenarios;
    const problems::Instance& inst = instances[i];
    const std::uint64_t inst_seed = data.manifest.instance_seeds[i];
    const std::uint64_t x_seed = MixSeed(inst_seed, d);
    DatasetRecord rec;
    rec.instance_ref = problems::IdOf(inst);
    rec.x = SampleFirstStage(inst, x_seed);
    rec.xi = SampleScenario(inst, MixSeed(x_seed ^ 0x5ce7a210ULL, s));
    rec.target_mode = spec.target_mode;
    std::optional<double> label;
    try {
      label = problems::SecondStageValue(inst, rec.x, rec.xi, spec.target_mode);
    } catch (const Error& e) {
      throw SolverError("labeling tuple (instance " + std::to_string(i) +
                        ", decision " + std::to_string(d) + ", scenario " +
                        std::to_string(s) + ") failed: " + e.what());
    }
    if (!label) return;
    rec.label = *label;
    rec.features_x = problems::FirstStageFeatures(inst, rec.x);
    rec.features_xi = problems::ScenarioFeatures(inst, rec.xi);
    slots[t] = std::move(rec);
  });
  double sum = 0.0;
  for (auto& slot : slots) {
    if (!slot) {
      ++data.manifest.dropped_infeasible;
      continue;
    }
    sum += slot->label;
    data.records.push_back(std::move(*slot));
  }
  DatasetManifest& m = data.manifest;
  m.records = static_cast<std::int64_t>(data.records.size());
  if (!data.records.empty()) {
    m.label_min = m.label_max = data.records[0].label;
    m.label_mean = sum / m.records;
    double var = 0.0;
    for (const DatasetRecord& r : data.records) {
      m.label_min = std::min(m.label_min, r.label);
      m.label_max = std::max(m.label_max, r.label);
      var += (r.label - m.label_mean) * (r.label - m.label_mean);
    }
    m.label_std = std::sqrt(var / m.records);
  }
  return data;
}

json RecordToJson(const DatasetRecord& rec) {
  return {{"instance_ref", rec.instance_ref},
          {"x", rec.x},
          {"xi", rec.xi},
          {"features_x", MatrixToJson(rec.features_x)},
          {"features_xi", MatrixToJson(rec.features_xi)},
          {"label", rec.label},
          {"target_mode", neural::ToString(rec.target_mode)}};
}

DatasetRecord RecordFromJson(const json& doc) {
  const std::string ctx = "dataset record";
  DatasetRecord rec;
  rec.instance_ref = RequireField<std::string>(doc, "instance_ref", ctx);
  rec.x = RequireField<std::vector<int>>(doc, "x", ctx);
  rec.xi = RequireField<std::vector<double>>(doc, "xi", ctx);
  rec.features_x = MatrixFromJson(RequireField<json>(doc, "features_x", ctx), "features_x");
  rec.features_xi =
      MatrixFromJson(RequireField<json>(doc, "features_xi", ctx), "features_xi");
  rec.label = RequireField<double>(doc, "label", ctx);
  rec.target_mode =
      neural::ParseTargetMode(RequireField<std::string>(doc, "target_mode", ctx));
  return rec;
}

void WriteDataset(const Dataset& data, const std::string& jsonl_path,
                  const std::string& manifest_path) {
  std::string body;
  for (const DatasetRecord& r : data.records) {
    body += RecordToJson(r).dump();
    body += '\n';
  }
  WriteFileAtomic(jsonl_path, body);
  json manifest = data.manifest.ToJson();
  manifest["file"] = std::filesystem::path(jsonl_path).filename().string();
  WriteJsonFile(manifest_path, manifest);
}

std::vector<DatasetRecord> ReadDatasetRecords(const std::string& jsonl_path) {
  std::istringstream in(ReadFile(jsonl_path));
  std::vector<DatasetRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(RecordFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw InputError(jsonl_path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(jsonl_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<neural::LabeledSample> ToSamples(const std::vector<DatasetRecord>& records) {
  std::vector<neural::LabeledSample> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) {
    out.push_back({r.instance_ref, r.features_x, r.features_xi, r.label});
  }
  return out;
}

}  // namespace roccg::datagen
