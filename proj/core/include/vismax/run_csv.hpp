#pragma once

#include "vismax/metrics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vismax {

inline constexpr const char* kRunCsvHeader =
    "iteration,env_steps,marginal_entropy,conditional_entropy,expected_return,strategy,layout,seed";

/// Shortest round-trip decimal form; identical inputs give identical text.
std::string format_real(double v);

void write_run_csv_header(std::ostream& os);
void write_run_csv_row(std::ostream& os, const MetricRecord& rec);
void write_run_csv(std::ostream& os, const std::vector<MetricRecord>& records);

/// Throws std::runtime_error naming `source` and the line on malformed input.
std::vector<MetricRecord> read_run_csv(std::istream& is, const std::string& source);
std::vector<MetricRecord> read_run_csv_file(const std::string& path);

/// "<layout>_<strategy>_seed<seed>.csv"
std::string run_csv_name(const std::string& layout, const std::string& strategy, std::uint64_t seed);

}  // namespace vismax
