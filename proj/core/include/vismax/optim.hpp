#pragma once

#include "vismax/types.hpp"

#include <cstdint>

namespace vismax {

struct AdamOptions {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam state for one flat parameter block (first/second moments + step count).
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n_params, AdamOptions options);

  /// params <- params - lr * mhat / (sqrt(vhat) + eps). Shapes must match.
  void step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad);
  void step(Table& params, const Table& grad);

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::uint64_t steps() const { return t_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

 private:
  AdamOptions options_;
  Vector m_;
  Vector v_;
  std::uint64_t t_ = 0;
};

/// target <- tau * online + (1 - tau) * target. Exact copy when tau == 1.
void polyak(Table& target, const Table& online, double tau);

}  // namespace vismax
