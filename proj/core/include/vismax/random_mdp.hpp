#pragma once

#include "vismax/mdp.hpp"

namespace vismax {

struct RandomMdpOptions {
  std::size_t max_states = 6;
  std::size_t max_actions = 3;
  std::size_t max_features = 5;
  double min_gamma = 0.05;
  double max_gamma = 0.95;
  /// Zero out transition entries at random (keeping one per row). Dense rows
  /// keep every state reachable from every pair.
  bool sparse = false;
};

/// Random instance used by the verification battery and property tests.
struct RandomInstance {
  TabularMdp mdp;
  Policy policy;
  FeatureMap features;
};

Vector random_simplex(std::size_t n, Rng& rng);

TabularMdp random_mdp(const RandomMdpOptions& options, Rng& rng);
Policy random_policy(std::size_t n_states, std::size_t n_actions, Rng& rng);
FeatureMap random_feature_map(std::size_t n_pairs, std::size_t n_features, Rng& rng);
RandomInstance random_instance(const RandomMdpOptions& options, Rng& rng);

}  // namespace vismax
