#include "problems/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/random.hpp"

namespace roccg::problems {

using nlohmann::json;

std::string_view ToString(Family f) {
  return f == Family::kKnapsack ? "knapsack" : "capital_budgeting";
}

Family ParseFamily(std::string_view s) {
  if (s == "knapsack") return Family::kKnapsack;
  if (s == "capital_budgeting") return Family::kCapitalBudgeting;
  throw InputError("unknown problem family '" + std::string(s) + "'");
}

std::string_view ToString(Correlation c) {
  switch (c) {
    case Correlation::kUncorrelated: return "UN";
    case Correlation::kWeakly: return "WC";
    case Correlation::kAlmostStrongly: return "ASC";
    case Correlation::kStrongly: return "SC";
  }
  return "UN";
}

Correlation ParseCorrelation(std::string_view s) {
  if (s == "UN") return Correlation::kUncorrelated;
  if (s == "WC") return Correlation::kWeakly;
  if (s == "ASC") return Correlation::kAlmostStrongly;
  if (s == "SC") return Correlation::kStrongly;
  throw InputError("unknown correlation tag '" + std::string(s) + "'");
}

namespace {

void CheckVector(const std::vector<double>& v, size_t n, const char* field,
                 const std::string& id) {
  if (v.size() != n) {
    throw InputError("instance " + id + ": field '" + field + "' has length " +
                     std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
  for (double e : v) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InputError("instance " + id + ": field '" + field +
                       "' must be finite and nonnegative");
    }
  }
}

}  // namespace

void KnapsackInstance::Validate() const {
  const size_t m = profit.size();
  if (m == 0) throw InputError("instance " + id + ": field 'profit' is empty");
  CheckVector(deviation, m, "deviation", id);
  CheckVector(outsource, m, "outsource", id);
  CheckVector(weight, m, "weight", id);
  CheckVector(repair, m, "repair", id);
  CheckVector(profit, m, "profit", id);
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw InputError("instance " + id + ": field 'capacity' must be positive");
  }
  if (!(budget >= 0.0) || budget > static_cast<double>(m)) {
    throw InputError("instance " + id + ": field 'budget' must lie in [0, n]");
  }
}

double CapitalBudgetingInstance::CostFactor(int i, const Scenario& xi) const {
  double s = 0.0;
  for (int k = 0; k < kCbScenarioDim; ++k) s += phi[i * kCbScenarioDim + k] * xi[k];
  return 1.0 + s / 2.0;
}

double CapitalBudgetingInstance::RevenueFactor(int i, const Scenario& xi) const {
  double s = 0.0;
  for (int k = 0; k < kCbScenarioDim; ++k) s += psi[i * kCbScenarioDim + k] * xi[k];
  return 1.0 + s / 2.0;
}

void CapitalBudgetingInstance::Validate() const {
  const size_t m = cost.size();
  if (m == 0) throw InputError("instance " + id + ": field 'cost' is empty");
  CheckVector(revenue, m, "revenue", id);
  for (const auto& [mat, name] : {std::pair{&phi, "phi"}, std::pair{&psi, "psi"}}) {
    if (mat->size() != m * kCbScenarioDim) {
      throw InputError("instance " + id + ": field '" + name + "' must be n x 4");
    }
    for (size_t i = 0; i < m; ++i) {
      double l1 = 0.0;
      for (int k = 0; k < kCbScenarioDim; ++k) {
        const double v = (*mat)[i * kCbScenarioDim + k];
        if (!std::isfinite(v)) {
          throw InputError("instance " + id + ": field '" + name + "' is not finite");
        }
        l1 += std::abs(v);
      }
      // Keeps 1 + row·ξ/2 nonnegative over the box.
      if (l1 > 2.0 + 1e-9) {
        throw InputError("instance " + id + ": field '" + name +
                         "' row " + std::to_string(i) + " has L1 norm above 2");
      }
    }
  }
  if (!std::isfinite(budget) || budget < 0.0) {
    throw InputError("instance " + id + ": field 'budget' must be nonnegative");
  }
  if (!(eta > 0.0 && eta < 1.0)) {
    throw InputError("instance " + id + ": field 'eta' must lie in (0, 1)");
  }
}

Family FamilyOf(const Instance& inst) {
  return std::holds_alternative<KnapsackInstance>(inst) ? Family::kKnapsack
                                                        : Family::kCapitalBudgeting;
}

const std::string& IdOf(const Instance& inst) {
  return std::visit([](const auto& i) -> const std::string& { return i.id; }, inst);
}

int NumItems(const Instance& inst) {
  return std::visit([](const auto& i) { return i.n(); }, inst);
}

int ScenarioDim(const Instance& inst) {
  return FamilyOf(inst) == Family::kKnapsack ? NumItems(inst) : kCbScenarioDim;
}

void Validate(const Instance& inst) {
  std::visit([](const auto& i) { i.Validate(); }, inst);
}

KnapsackInstance GenerateKnapsack(int n, Correlation correlation, std::uint64_t seed) {
  if (n < 1) throw UsageError("knapsack instances need n >= 1");
  Rng rng(seed);
  KnapsackInstance inst;
  inst.id = "kp-n" + std::to_string(n) + "-" + std::string(ToString(correlation)) +
            "-s" + std::to_string(seed);
  inst.seed = seed;
  inst.correlation = correlation;
  for (int i = 0; i < n; ++i) {
    const double c = static_cast<double>(rng.UniformInt(1, 100));
    double p = 0.0;
    switch (correlation) {
      case Correlation::kUncorrelated:
        p = static_cast<double>(rng.UniformInt(1, 100));
        break;
      case Correlation::kWeakly:
        p = std::max(1.0, c + static_cast<double>(rng.UniformInt(-10, 10)));
        break;
      case Correlation::kAlmostStrongly:
        p = c + 10.0 + static_cast<double>(rng.UniformInt(-2, 2));
        break;
      case Correlation::kStrongly:
        p = c + 10.0;
        break;
    }
    inst.weight.push_back(c);
    inst.profit.push_back(p);
    inst.outsource.push_back(1.1 * p);
    inst.repair.push_back(std::ceil(c / 2.0));
    inst.deviation.push_back(std::round(0.5 * p));
  }
  inst.capacity =
      std::round(0.35 * std::accumulate(inst.weight.begin(), inst.weight.end(), 0.0));
  inst.capacity = std::max(inst.capacity, 1.0);
  inst.budget = std::ceil(0.1 * n);
  return inst;
}

namespace {

// Uniform point on the probability simplex.
void SimplexRow(Rng& rng, double* row) {
  double sum = 0.0;
  for (int k = 0; k < kCbScenarioDim; ++k) {
    row[k] = -std::log1p(-rng.Uniform());
    sum += row[k];
  }
  if (sum <= 0.0) {
    for (int k = 0; k < kCbScenarioDim; ++k) row[k] = 1.0 / kCbScenarioDim;
    return;
  }
  for (int k = 0; k < kCbScenarioDim; ++k) row[k] /= sum;
}

}  // namespace

CapitalBudgetingInstance GenerateCapitalBudgeting(int n, std::uint64_t seed) {
  if (n < 1) throw UsageError("capital budgeting instances need n >= 1");
  Rng rng(seed);
  CapitalBudgetingInstance inst;
  inst.id = "cb-n" + std::to_string(n) + "-s" + std::to_string(seed);
  inst.seed = seed;
  inst.phi.assign(static_cast<size_t>(n) * kCbScenarioDim, 0.0);
  inst.psi.assign(static_cast<size_t>(n) * kCbScenarioDim, 0.0);
  for (int i = 0; i < n; ++i) {
    const double c = rng.Uniform(1.0, 10.0);
    inst.cost.push_back(c);
    inst.revenue.push_back(c / 5.0);
    SimplexRow(rng, &inst.phi[i * kCbScenarioDim]);
    SimplexRow(rng, &inst.psi[i * kCbScenarioDim]);
  }
  inst.budget = std::accumulate(inst.cost.begin(), inst.cost.end(), 0.0) / 2.0;
  inst.eta = 0.8;
  return inst;
}

json InstanceToJson(const Instance& inst) {
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    return {{"schema_version", kInstanceSchemaVersion},
            {"family", ToString(Family::kKnapsack)},
            {"id", kp->id},
            {"n", kp->n()},
            {"seed", kp->seed},
            {"correlation", ToString(kp->correlation)},
            {"profit", kp->profit},
            {"deviation", kp->deviation},
            {"outsource", kp->outsource},
            {"weight", kp->weight},
            {"repair", kp->repair},
            {"capacity", kp->capacity},
            {"budget", kp->budget}};
  }
  const auto& cb = std::get<CapitalBudgetingInstance>(inst);
  auto rows = [&](const std::vector<double>& m) {
    json arr = json::array();
    for (int i = 0; i < cb.n(); ++i) {
      arr.push_back(std::vector<double>(m.begin() + i * kCbScenarioDim,
                                        m.begin() + (i + 1) * kCbScenarioDim));
    }
    return arr;
  };
  return {{"schema_version", kInstanceSchemaVersion},
          {"family", ToString(Family::kCapitalBudgeting)},
          {"id", cb.id},
          {"n", cb.n()},
          {"seed", cb.seed},
          {"cost", cb.cost},
          {"revenue", cb.revenue},
          {"phi", rows(cb.phi)},
          {"psi", rows(cb.psi)},
          {"budget", cb.budget},
          {"eta", cb.eta}};
}

Instance InstanceFromJson(const json& doc) {
  const std::string ctx = "instance";
  CheckSchemaVersion(doc, kInstanceSchemaVersion, ctx);
  const Family family = ParseFamily(RequireField<std::string>(doc, "family", ctx));
  const int n = RequireField<int>(doc, "n", ctx);
  Instance out;
  if (family == Family::kKnapsack) {
    KnapsackInstance kp;
    kp.id = RequireField<std::string>(doc, "id", ctx);
    kp.seed = RequireField<std::uint64_t>(doc, "seed", ctx);
    kp.correlation = ParseCorrelation(RequireField<std::string>(doc, "correlation", ctx));
    kp.profit = RequireField<std::vector<double>>(doc, "profit", ctx);
    kp.deviation = RequireField<std::vector<double>>(doc, "deviation", ctx);
    kp.outsource = RequireField<std::vector<double>>(doc, "outsource", ctx);
    kp.weight = RequireField<std::vector<double>>(doc, "weight", ctx);
    kp.repair = RequireField<std::vector<double>>(doc, "repair", ctx);
    kp.capacity = RequireField<double>(doc, "capacity", ctx);
    kp.budget = RequireField<double>(doc, "budget", ctx);
    out = std::move(kp);
  } else {
    CapitalBudgetingInstance cb;
    cb.id = RequireField<std::string>(doc, "id", ctx);
    cb.seed = RequireField<std::uint64_t>(doc, "seed", ctx);
    cb.cost = RequireField<std::vector<double>>(doc, "cost", ctx);
    cb.revenue = RequireField<std::vector<double>>(doc, "revenue", ctx);
    for (const auto& [field, dst] :
         {std::pair{"phi", &cb.phi}, std::pair{"psi", &cb.psi}}) {
      for (const auto& row : RequireField<std::vector<std::vector<double>>>(doc, field, ctx)) {
        if (row.size() != kCbScenarioDim) {
          throw InputError("instance: field '" + std::string(field) +
                           "' rows must have 4 entries");
        }
        dst->insert(dst->end(), row.begin(), row.end());
      }
    }
    cb.budget = RequireField<double>(doc, "budget", ctx);
    cb.eta = RequireField<double>(doc, "eta", ctx);
    out = std::move(cb);
  }
  if (NumItems(out) != n) {
    throw InputError("instance: field 'n' does not match the array lengths");
  }
  Validate(out);
  return out;
}

void SaveInstance(const Instance& inst, const std::string& path) {
  WriteJsonFile(path, InstanceToJson(inst));
}

Instance LoadInstance(const std::string& path) {
  return InstanceFromJson(ReadJsonFile(path));
}

void CheckFirstStage(const Instance& inst, const FirstStage& x) {
  if (static_cast<int>(x.size()) != NumItems(inst)) {
    throw InputError("first-stage vector has length " + std::to_string(x.size()) +
                     ", instance has " + std::to_string(NumItems(inst)) + " items");
  }
  for (int v : x) {
    if (v != 0 && v != 1) throw InputError("first-stage vector must be binary");
  }
}

bool InUncertaintySet(const Instance& inst, const Scenario& xi, double tol) {
  if (static_cast<int>(xi.size()) != ScenarioDim(inst)) return false;
  if (const auto* kp = std::get_if<KnapsackInstance>(&inst)) {
    double sum = 0.0;
    for (double v : xi) {
      if (!(v >= -tol && v <= 1.0 + tol)) return false;
      sum += v;
    }
    return sum <= kp->budget + tol;
  }
  return std::all_of(xi.begin(), xi.end(),
                     [tol](double v) { return v >= -1.0 - tol && v <= 1.0 + tol; });
}

}  // namespace roccg::problems
