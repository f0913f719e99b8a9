#ifndef ROCCG_DATAGEN_DATASET_HPP_
#define ROCCG_DATAGEN_DATASET_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "neural/network.hpp"
#include "problems/instance.hpp"

namespace roccg::datagen {

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetSpec {
  problems::Family family = problems::Family::kKnapsack;
  int instances = 100;
  int decisions = 10;   // first-stage decisions per instance
  int scenarios = 20;   // scenarios per decision
  int n_min = 8;
  int n_max = 12;
  neural::TargetMode target_mode = neural::TargetMode::kSum;
  std::uint64_t seed = 0;

  // Throws UsageError on a nonpositive count or an empty size range.
  void Validate() const;
  nlohmann::json ToJson() const;
  static DatasetSpec FromJson(const nlohmann::json& doc);
};

// Instance i of a spec; knapsack correlation tags cycle UN, WC, ASC, SC.
problems::Instance SpecInstance(const DatasetSpec& spec, int index);

struct DatasetRecord {
  std::string instance_ref;
  problems::FirstStage x;
  problems::Scenario xi;
  neural::Matrix features_x;
  neural::Matrix features_xi;
  double label = 0.0;
  neural::TargetMode target_mode = neural::TargetMode::kSum;
};

struct DatasetManifest {
  DatasetSpec spec;
  std::int64_t records = 0;
  std::int64_t dropped_infeasible = 0;
  double label_min = 0.0;
  double label_max = 0.0;
  double label_mean = 0.0;
  double label_std = 0.0;
  std::vector<std::uint64_t> instance_seeds;

  nlohmann::json ToJson() const;
};

struct Dataset {
  std::vector<DatasetRecord> records;  // ordered by tuple index
  DatasetManifest manifest;
};

// Labels every (instance, decision, scenario) tuple with the exact
// second-stage value on `threads` workers. Capital budgeting pairs with an
// infeasible second stage are dropped and counted. An inner solver failure
// throws SolverError naming the tuple.
Dataset BuildDataset(const DatasetSpec& spec, int threads = 1);

nlohmann::json RecordToJson(const DatasetRecord& rec);
DatasetRecord RecordFromJson(const nlohmann::json& doc);

// JSON lines: one record per line. Written atomically.
void WriteDataset(const Dataset& data, const std::string& jsonl_path,
                  const std::string& manifest_path);
// Throws InputError naming the line and field on malformed input.
std::vector<DatasetRecord> ReadDatasetRecords(const std::string& jsonl_path);

std::vector<neural::LabeledSample> ToSamples(const std::vector<DatasetRecord>& records);

}  // namespace roccg::datagen

#endif  // ROCCG_DATAGEN_DATASET_HPP_
