#include "vismax/run_csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vismax {

std::string format_real(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

void write_run_csv_header(std::ostream& os) { os << kRunCsvHeader << "\n"; }

void write_run_csv_row(std::ostream& os, const MetricRecord& rec) {
  os << rec.iteration << ',' << rec.env_steps << ',' << format_real(rec.marginal_entropy) << ','
     << format_real(rec.conditional_entropy) << ',' << format_real(rec.expected_return) << ',' << rec.strategy << ','
     << rec.layout << ',' << rec.seed << "\n";
}

void write_run_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
  write_run_csv_header(os);
  for (const auto& r : records) write_run_csv_row(os, r);
}

namespace {

template <typename T>
T parse_field(const std::string& field, const std::string& source, std::size_t line, const char* name) {
  T out{};
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::runtime_error(source + ":" + std::to_string(line) + ": bad " + name + " '" + field + "'");
  return out;
}

}  // namespace

std::vector<MetricRecord> read_run_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader) throw std::runtime_error(source + ":1: unexpected header '" + line + "'");

  std::vector<MetricRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 8)
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected 8 fields, got " +
                               std::to_string(fields.size()));
    MetricRecord r;
    r.iteration = parse_field<std::size_t>(fields[0], source, lineno, "iteration");
    r.env_steps = parse_field<std::size_t>(fields[1], source, lineno, "env_steps");
    r.marginal_entropy = parse_field<double>(fields[2], source, lineno, "marginal_entropy");
    r.conditional_entropy = parse_field<double>(fields[3], source, lineno, "conditional_entropy");
    r.expected_return = parse_field<double>(fields[4], source, lineno, "expected_return");
    r.strategy = fields[5];
    r.layout = fields[6];
    r.seed = parse_field<std::uint64_t>(fields[7], source, lineno, "seed");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricRecord> read_run_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(path + ": cannot open");
  return read_run_csv(is, path);
}

std::string run_csv_name(const std::string& layout, const std::string& strategy, std::uint64_t seed) {
  return layout + "_" + strategy + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace vismax
