#ifndef ROCCG_EVAL_BENCH_HPP_
#define ROCCG_EVAL_BENCH_HPP_

#include <string>
#include <vector>

#include "eval/evaluate.hpp"
#include "json.hpp"

namespace roccg::eval {

struct BenchRow {
  std::string instance_id;
  std::string method;
  double objective = 0.0;  // post-hoc evaluated worst case
  RelativeError re;        // filled by BuildReport
  double wall_ms = 0.0;
};

struct MethodSummary {
  std::string method;
  int instances = 0;
  double median_re = 0.0;
  double q1_re = 0.0;
  double q3_re = 0.0;
  double mean_re = 0.0;
  double mean_objective = 0.0;
  double mean_wall_ms = 0.0;
  int absolute_re = 0;  // rows whose RE fell back to an absolute difference
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<MethodSummary> summary;  // in method order

  // instance_id,method,objective,re_pct,wall_ms
  std::string ToCsv() const;
  nlohmann::json SummaryJson() const;
};

// Anchors RE on the best (smallest) objective of each instance and
// aggregates per method. Row order is kept.
BenchReport BuildReport(std::vector<BenchRow> rows, const std::vector<std::string>& methods);

// Linear interpolation between order statistics; throws UsageError when empty.
double Quantile(std::vector<double> values, double q);

}  // namespace roccg::eval

#endif  // ROCCG_EVAL_BENCH_HPP_
