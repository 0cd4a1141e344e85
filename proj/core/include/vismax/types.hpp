#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace vismax {

/// Dense row-major table. Rows are distributions or per-(s,a) entries.
using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Stochastic policy pi(a|s) stored as an n_states x n_actions row-stochastic table.
using Policy = Table;

using Rng = std::mt19937_64;

struct StateAction {
  std::size_t state = 0;
  std::size_t action = 0;

  friend bool operator==(const StateAction&, const StateAction&) = default;
};

/// Thrown when an iterative solver exceeds its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF sample from an unnormalized non-negative weight vector.
inline std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

inline std::span<const double> row_span(const Table& t, Eigen::Index row) {
  return {t.data() + row * t.cols(), static_cast<std::size_t>(t.cols())};
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Row-wise numerically stable softmax of a single row.
inline void softmax_row(const double* logits, std::size_t n, double* out) {
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = logits[i] > mx ? logits[i] : mx;
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

}  // namespace vismax
