#include "eval/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "common/error.hpp"
#include "common/io.hpp"

namespace roccg::eval {

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw UsageError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(values.size() - 1, lo + 1);
  const double t = pos - static_cast<double>(lo);
  if (t == 0.0) return values[lo];
  return values[lo] + t * (values[hi] - values[lo]);
}

BenchReport BuildReport(std::vector<BenchRow> rows, const std::vector<std::string>& methods) {
  std::map<std::string, double> best;
  for (const BenchRow& r : rows) {
    auto [it, inserted] = best.emplace(r.instance_id, r.objective);
    if (!inserted) it->second = std::min(it->second, r.objective);
  }
  for (BenchRow& r : rows) {
    const double b = best.at(r.instance_id);
    if (r.objective == b) {
      r.re = {0.0, false};
    } else if (!std::isfinite(b) || !std::isfinite(r.objective)) {
      r.re = {INFINITY, false};
    } else {
      r.re = ComputeRelativeError(b, r.objective);
    }
  }
  BenchReport report;
  for (const std::string& m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> re;
    double obj_sum = 0.0, wall_sum = 0.0;
    for (const BenchRow& r : rows) {
      if (r.method != m) continue;
      re.push_back(r.re.pct);
      obj_sum += r.objective;
      wall_sum += r.wall_ms;
      if (r.re.absolute) ++s.absolute_re;
    }
    s.instances = static_cast<int>(re.size());
    if (!re.empty()) {
      s.median_re = Quantile(re, 0.5);
      s.q1_re = Quantile(re, 0.25);
      s.q3_re = Quantile(re, 0.75);
      double sum = 0.0;
      for (double v : re) sum += v;
      s.mean_re = sum / static_cast<double>(re.size());
      s.mean_objective = obj_sum / static_cast<double>(re.size());
      s.mean_wall_ms = wall_sum / static_cast<double>(re.size());
    }
    report.summary.push_back(s);
  }
  report.rows = std::move(rows);
  return report;
}

std::string BenchReport::ToCsv() const {
  std::string out = "instance_id,method,objective,re_pct,wall_ms\n";
  for (const BenchRow& r : rows) {
    out += CsvField(r.instance_id) + ',' + CsvField(r.method) + ',' + FormatDouble(r.objective) +
           ',' + FormatDouble(r.re.pct) + ',' + FormatDouble(r.wall_ms) + '\n';
  }
  return out;
}

nlohmann::json BenchReport::SummaryJson() const {
  nlohmann::json methods = nlohmann::json::array();
  for (const MethodSummary& s : summary) {
    methods.push_back({{"method", s.method},
                       {"instances", s.instances},
                       {"median_re_pct", JsonNumber(s.median_re)},
                       {"q1_re_pct", JsonNumber(s.q1_re)},
                       {"q3_re_pct", JsonNumber(s.q3_re)},
                       {"mean_re_pct", JsonNumber(s.mean_re)},
                       {"mean_objective", JsonNumber(s.mean_objective)},
                       {"mean_wall_ms", JsonNumber(s.mean_wall_ms)},
                       {"absolute_re_rows", s.absolute_re}});
  }
  nlohmann::json absolute = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    if (r.re.absolute) absolute.push_back({{"instance_id", r.instance_id}, {"method", r.method}});
  }
  return {{"methods", methods}, {"absolute_re", absolute}};
}

}  // namespace roccg::eval
