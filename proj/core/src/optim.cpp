#include "vismax/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace vismax {

Adam::Adam(Eigen::Index n_params, AdamOptions options)
    : options_(options), m_(Vector::Zero(n_params)), v_(Vector::Zero(n_params)) {
  if (!(options_.learning_rate > 0.0)) throw std::invalid_argument("Adam learning rate must be positive");
}

void Adam::step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam shape mismatch");
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grad(i);
    m_(i) = b1 * m_(i) + (1.0 - b1) * g;
    v_(i) = b2 * v_(i) + (1.0 - b2) * g * g;
    params(i) -= lr * (m_(i) / c1) / (std::sqrt(v_(i) / c2) + eps);
  }
}

void Adam::step(Table& params, const Table& grad) {
  if (params.rows() != grad.rows() || params.cols() != grad.cols()) throw std::invalid_argument("Adam shape mismatch");
  Eigen::Map<Vector> p(params.data(), params.size());
  Eigen::Map<const Vector> g(grad.data(), grad.size());
  step(p, g);
}

void polyak(Table& target, const Table& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("Polyak coefficient must lie in [0, 1]");
  if (target.rows() != online.rows() || target.cols() != online.cols())
    throw std::invalid_argument("Polyak shape mismatch");
  if (tau == 1.0) {
    target = online;
  } else if (tau > 0.0) {
    target = tau * online + (1.0 - tau) * target;
  }
}

}  // namespace vismax
