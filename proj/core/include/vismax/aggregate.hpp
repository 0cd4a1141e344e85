#pragma once

#include "vismax/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vismax {

inline constexpr const char* kAggregateCsvHeader = "iteration,metric,iqm,ci_low,ci_high,n_runs";

struct AggregateRow {
  std::size_t iteration = 0;
  std::string metric;
  double iqm = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_runs = 0;
};

/// 25%-trimmed mean with fractional weights on the boundary values.
double interquartile_mean(std::span<const double> values);

struct RunSeries {
  std::string source;
  std::vector<MetricRecord> records;
};

struct AggregateOptions {
  std::size_t resamples = 1000;
  std::uint64_t seed = 20240101;
  double confidence = 0.95;
};

/// Metric names in output order.
const std::vector<std::string>& aggregate_metrics();
double metric_value(const MetricRecord& rec, const std::string& metric);

/**
 * Per iteration and metric: IQM across runs and a percentile bootstrap CI over
 * runs, clamped so it contains the IQM. Runs must share one iteration grid;
 * otherwise std::runtime_error lists the offending sources.
 */
std::vector<AggregateRow> aggregate_runs(const std::vector<RunSeries>& runs, const AggregateOptions& opts = {});

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& is, const std::string& source);

}  // namespace vismax
