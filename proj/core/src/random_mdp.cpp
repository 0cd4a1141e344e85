#include "vismax/random_mdp.hpp"

#include <cmath>

namespace vismax {

Vector random_simplex(std::size_t n, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = -std::log(1.0 - uniform01(rng));
  v /= v.sum();
  return v;
}

namespace {

std::size_t draw_count(std::size_t max, Rng& rng) { return 1 + uniform_index(max, rng); }

// Renormalizing a sampled simplex row leaves rounding error around 1e-16.
void set_row(Table& t, Eigen::Index row, const Vector& v) {
  t.row(row) = v.transpose();
  t.row(row) /= t.row(row).sum();
}

}  // namespace

TabularMdp random_mdp(const RandomMdpOptions& options, Rng& rng) {
  const std::size_t n_states = draw_count(options.max_states, rng);
  const std::size_t n_actions = draw_count(options.max_actions, rng);
  const auto rows = static_cast<Eigen::Index>(n_states * n_actions);
  Table transition(rows, static_cast<Eigen::Index>(n_states));
  for (Eigen::Index i = 0; i < rows; ++i) {
    Vector v = random_simplex(n_states, rng);
    if (options.sparse && n_states > 1) {
      const std::size_t keep = uniform_index(n_states, rng);
      for (std::size_t j = 0; j < n_states; ++j)
        if (j != keep && uniform01(rng) < 0.5) v(static_cast<Eigen::Index>(j)) = 0.0;
      v /= v.sum();
    }
    set_row(transition, i, v);
  }
  Vector p0 = random_simplex(n_states, rng);
  p0 /= p0.sum();
  Table reward(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions));
  for (Eigen::Index i = 0; i < reward.size(); ++i) reward.data()[i] = uniform01(rng);
  const double gamma = options.min_gamma + (options.max_gamma - options.min_gamma) * uniform01(rng);
  return TabularMdp(std::move(transition), std::move(p0), std::move(reward), gamma);
}

Policy random_policy(std::size_t n_states, std::size_t n_actions, Rng& rng) {
  Policy pi(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions));
  for (Eigen::Index s = 0; s < pi.rows(); ++s) set_row(pi, s, random_simplex(n_actions, rng));
  return pi;
}

FeatureMap random_feature_map(std::size_t n_pairs, std::size_t n_features, Rng& rng) {
  Table h(static_cast<Eigen::Index>(n_pairs), static_cast<Eigen::Index>(n_features));
  for (Eigen::Index i = 0; i < h.rows(); ++i) set_row(h, i, random_simplex(n_features, rng));
  return FeatureMap(std::move(h));
}

RandomInstance random_instance(const RandomMdpOptions& options, Rng& rng) {
  TabularMdp mdp = random_mdp(options, rng);
  Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
  FeatureMap h = random_feature_map(mdp.n_pairs(), draw_count(options.max_features, rng), rng);
  return {std::move(mdp), std::move(pi), std::move(h)};
}

}  // namespace vismax
