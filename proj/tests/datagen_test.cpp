#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/random.hpp"
#include "datagen/dataset.hpp"
#include "datagen/sampling.hpp"
#include "doctest.h"
#include "problems/recourse.hpp"

using namespace roccg;
using namespace roccg::datagen;
using problems::Family;

namespace {

std::filesystem::path TempDir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Enumerates every (y, r) for a knapsack record.
double BruteLabel(const problems::KnapsackInstance& kp, const problems::FirstStage& x,
                  const problems::Scenario& xi) {
  const int n = kp.n();
  double best = INFINITY;
  for (long mask = 0; mask < (1L << (2 * n)); ++mask) {
    double w = 0, v = 0;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const int y = (mask >> i) & 1, r = (mask >> (n + i)) & 1;
      ok = y <= x[i] && r <= y;
      w += kp.weight[i] * y + kp.repair[i] * r;
      v += (kp.deviation[i] * xi[i] - kp.outsource[i]) * y - kp.deviation[i] * xi[i] * r;
    }
    if (ok && w <= kp.capacity) best = std::min(best, v);
  }
  for (int i = 0; i < n; ++i) best += x[i] * (kp.outsource[i] - kp.profit[i]);
  return best;
}

}  // namespace

TEST_CASE("first-stage sampler") {
  problems::Instance kp = problems::GenerateKnapsack(20, problems::Correlation::kWeakly, 1);
  Rng rng(5);
  std::vector<int> hist(21, 0);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    problems::FirstStage x = SampleFirstStage(kp, rng);
    int k = 0;
    for (int v : x) k += v;
    hist[k]++;
  }
  // With ρ uniform, the number of selected items is uniform on {0, ..., n}.
  for (int h : hist) CHECK(std::abs(h - draws / 21.0) < 100);

  problems::Instance cb = problems::GenerateCapitalBudgeting(15, 2);
  const auto& c = std::get<problems::CapitalBudgetingInstance>(cb);
  for (int t = 0; t < 1000; ++t) {
    problems::FirstStage x = SampleFirstStage(cb, rng);
    double cost = 0;
    for (int i = 0; i < 15; ++i) cost += x[i] * c.cost[i];
    CHECK(cost <= c.budget);
  }
  CHECK(SampleFirstStage(kp, 9) == SampleFirstStage(kp, 9));
}

TEST_CASE("scenario sampler") {
  Rng rng(7);
  auto kp = problems::GenerateKnapsack(20, problems::Correlation::kUncorrelated, 1);
  kp.budget = 2;
  problems::Instance inst = kp;
  for (int t = 0; t < 2000; ++t) {
    problems::Scenario xi = SampleScenario(inst, rng);
    double sum = 0;
    for (double v : xi) {
      CHECK(v >= 0);
      CHECK(v <= 1);
      sum += v;
    }
    CHECK(sum <= 2 + 1e-12);
    CHECK(problems::InUncertaintySet(inst, xi));
  }
  // Raw uniform draws in 20 dimensions almost never fit a budget of 2.
  int rescaled = 0;
  for (int t = 0; t < 2000; ++t) {
    double s = 0;
    for (int i = 0; i < 20; ++i) s += rng.Uniform();
    rescaled += s > 2;
  }
  CHECK(rescaled >= 1990);

  kp.budget = 0;
  problems::Instance zero = kp;
  CHECK(SampleScenario(zero, rng) == problems::Scenario(20, 0.0));

  problems::Instance cb = problems::GenerateCapitalBudgeting(5, 1);
  for (int t = 0; t < 200; ++t) {
    problems::Scenario xi = SampleScenario(cb, rng);
    CHECK(xi.size() == 4);
    CHECK(problems::InUncertaintySet(cb, xi));
  }
}

TEST_CASE("dataset record counts") {
  DatasetSpec spec;
  spec.instances = 2;
  spec.decisions = 3;
  spec.scenarios = 4;
  spec.n_min = 3;
  spec.n_max = 6;
  Dataset d = BuildDataset(spec);
  CHECK(d.records.size() == 24);
  CHECK(d.manifest.dropped_infeasible == 0);
  CHECK(d.manifest.records == 24);
  CHECK(d.manifest.label_min <= d.manifest.label_max);

  spec.family = Family::kCapitalBudgeting;
  spec.instances = 5;
  Dataset cb = BuildDataset(spec);
  CHECK(cb.manifest.records + cb.manifest.dropped_infeasible == 60);
  CHECK(static_cast<int>(cb.records.size()) == cb.manifest.records);

  spec.decisions = 0;
  CHECK_THROWS_AS(BuildDataset(spec), UsageError);
}

TEST_CASE("labels match enumeration") {
  DatasetSpec spec;
  spec.instances = 10;
  spec.decisions = 5;
  spec.scenarios = 1;
  spec.n_min = 4;
  spec.n_max = 8;
  spec.seed = 3;
  Dataset d = BuildDataset(spec);
  REQUIRE(d.records.size() == 50);
  for (size_t r = 0; r < d.records.size(); ++r) {
    const auto inst = SpecInstance(spec, static_cast<int>(r / 5));
    const auto& kp = std::get<problems::KnapsackInstance>(inst);
    CHECK(d.records[r].instance_ref == kp.id);
    CHECK(d.records[r].label ==
          doctest::Approx(BruteLabel(kp, d.records[r].x, d.records[r].xi)).epsilon(1e-9));
  }
}

TEST_CASE("sum and second-only labels differ by the first-stage term") {
  for (Family family : {Family::kKnapsack, Family::kCapitalBudgeting}) {
    DatasetSpec spec;
    spec.family = family;
    spec.instances = 3;
    spec.decisions = 4;
    spec.scenarios = 5;
    Dataset sum = BuildDataset(spec);
    spec.target_mode = neural::TargetMode::kSecondOnly;
    Dataset second = BuildDataset(spec);
    REQUIRE(sum.records.size() == second.records.size());
    for (size_t r = 0; r < sum.records.size(); ++r) {
      const DatasetRecord& a = sum.records[r];
      CHECK(a.x == second.records[r].x);
      // Instance lookup by reference.
      for (int i = 0; i < spec.instances; ++i) {
        const auto cand = SpecInstance(spec, i);
        if (problems::IdOf(cand) != a.instance_ref) continue;
        CHECK(a.label - second.records[r].label ==
              doctest::Approx(problems::FirstStageCost(cand, a.x, a.xi)));
      }
    }
  }
}

TEST_CASE("parallel labeling is deterministic") {
  DatasetSpec spec;
  spec.family = Family::kCapitalBudgeting;
  spec.instances = 4;
  spec.decisions = 5;
  spec.scenarios = 6;
  spec.seed = 11;
  const auto dir = TempDir("roccg_datagen_test");
  Dataset seq = BuildDataset(spec, 1);
  Dataset par = BuildDataset(spec, 4);
  WriteDataset(seq, (dir / "a.jsonl").string(), (dir / "a.json").string());
  WriteDataset(par, (dir / "b.jsonl").string(), (dir / "b.json").string());
  Dataset again = BuildDataset(spec, 2);
  WriteDataset(again, (dir / "c.jsonl").string(), (dir / "c.json").string());
  CHECK(ReadFile((dir / "a.jsonl").string()) == ReadFile((dir / "b.jsonl").string()));
  CHECK(ReadFile((dir / "a.jsonl").string()) == ReadFile((dir / "c.jsonl").string()));

  std::vector<DatasetRecord> back = ReadDatasetRecords((dir / "a.jsonl").string());
  REQUIRE(back.size() == seq.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].label == seq.records[i].label);
    CHECK(back[i].features_xi == seq.records[i].features_xi);
    CHECK(back[i].xi == seq.records[i].xi);
  }
  nlohmann::json manifest = ReadJsonFile((dir / "a.json").string());
  CHECK(manifest["schema_version"] == kDatasetSchemaVersion);
  CHECK(manifest["records"] == seq.manifest.records);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed dataset lines are reported") {
  const auto dir = TempDir("roccg_datagen_bad");
  const std::string path = (dir / "bad.jsonl").string();
  WriteFileAtomic(path, "{\"instance_ref\": \"a\"}\n");
  CHECK_THROWS_WITH_AS(ReadDatasetRecords(path), doctest::Contains("'x'"), InputError);
  std::filesystem::remove_all(dir);
}
