#include "vismax/aggregate.hpp"

#include "vismax/run_csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vismax {

double interquartile_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("interquartile mean of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double lo = 0.25 * n;
  const double hi = 0.75 * n;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Value i occupies [i, i + 1) of the sorted mass.
    const double w = std::max(0.0, std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i)));
    acc += w * v[i];
  }
  return acc / (hi - lo);
}

const std::vector<std::string>& aggregate_metrics() {
  static const std::vector<std::string> names{"marginal_entropy", "conditional_entropy", "expected_return"};
  return names;
}

double metric_value(const MetricRecord& rec, const std::string& metric) {
  if (metric == "marginal_entropy") return rec.marginal_entropy;
  if (metric == "conditional_entropy") return rec.conditional_entropy;
  if (metric == "expected_return") return rec.expected_return;
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

namespace {

double percentile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<AggregateRow> aggregate_runs(const std::vector<RunSeries>& runs, const AggregateOptions& opts) {
  if (runs.size() < 2) throw std::runtime_error("aggregation needs at least two runs");
  if (opts.resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");

  std::vector<std::size_t> grid;
  for (const auto& r : runs[0].records) grid.push_back(r.iteration);
  if (grid.empty()) throw std::runtime_error(runs[0].source + ": no records");
  std::string mismatched;
  for (const auto& run : runs) {
    bool same = run.records.size() == grid.size();
    for (std::size_t i = 0; same && i < grid.size(); ++i) same = run.records[i].iteration == grid[i];
    if (!same) mismatched += (mismatched.empty() ? "" : ", ") + run.source;
  }
  if (!mismatched.empty())
    throw std::runtime_error("iteration grids differ from " + runs[0].source + ": " + mismatched);

  const std::size_t n = runs.size();
  // One set of resampled run indices shared by every iteration and metric.
  Rng rng(opts.seed);
  std::vector<std::vector<std::size_t>> draws(opts.resamples, std::vector<std::size_t>(n));
  for (auto& d : draws)
    for (auto& i : d) i = uniform_index(n, rng);

  const double alpha = 0.5 * (1.0 - opts.confidence);
  std::vector<AggregateRow> out;
  std::vector<double> vals(n), sample(n), boot(opts.resamples);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (const auto& metric : aggregate_metrics()) {
      for (std::size_t r = 0; r < n; ++r) vals[r] = metric_value(runs[r].records[g], metric);
      AggregateRow row;
      row.iteration = grid[g];
      row.metric = metric;
      row.n_runs = n;
      row.iqm = interquartile_mean(vals);
      for (std::size_t b = 0; b < opts.resamples; ++b) {
        for (std::size_t r = 0; r < n; ++r) sample[r] = vals[draws[b][r]];
        boot[b] = interquartile_mean(sample);
      }
      std::sort(boot.begin(), boot.end());
      row.ci_low = std::min(percentile(boot, alpha), row.iqm);
      row.ci_high = std::max(percentile(boot, 1.0 - alpha), row.iqm);
      out.push_back(std::move(row));
    }
  }
  return out;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << kAggregateCsvHeader << "\n";
  for (const auto& r : rows)
    os << r.iteration << ',' << r.metric << ',' << format_real(r.iqm) << ',' << format_real(r.ci_low) << ','
       << format_real(r.ci_high) << ',' << r.n_runs << "\n";
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line) || line != kAggregateCsvHeader)
    throw std::runtime_error(source + ":1: expected header '" + std::string(kAggregateCsvHeader) + "'");
  std::vector<AggregateRow> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    const auto bad = [&](const std::string& what) {
      return std::runtime_error(source + ":" + std::to_string(lineno) + ": " + what);
    };
    if (f.size() != 6) throw bad("expected 6 fields");
    AggregateRow r;
    r.metric = f[1];
    const auto num = [&](const std::string& s, auto& v) {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw bad("bad number '" + s + "'");
    };
    num(f[0], r.iteration);
    num(f[2], r.iqm);
    num(f[3], r.ci_low);
    num(f[4], r.ci_high);
    num(f[5], r.n_runs);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vismax
