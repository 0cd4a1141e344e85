#pragma once

#include "vismax/mdp.hpp"
#include "vismax/visitation_oracle.hpp"

#include <cstdint>
#include <string>

namespace vismax {

/// One evaluation row of a training run.
struct MetricRecord {
  std::size_t iteration = 0;
  std::size_t env_steps = 0;
  double marginal_entropy = 0.0;
  double conditional_entropy = 0.0;
  double expected_return = 0.0;
  std::string strategy;
  std::string layout;
  std::uint64_t seed = 0;
};

/// Discounted feature occupancy d(z) = sum_{s,a} h(z|s,a) d(s,a) from p0.
Vector feature_occupancy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap);

/// -KL(d(z) || q*) with d the discounted marginal feature occupancy.
double marginal_feature_entropy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                const RelativeMeasure& qstar);

/**
 * -E_{s0 ~ p0}[KL(d(z | s0) || q*)] where d(. | s0) is the discounted feature
 * occupancy of trajectories started at s0 (the t = 0 step included).
 */
double conditional_feature_entropy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                   const RelativeMeasure& qstar);

struct McEntropyEstimate {
  double marginal = 0.0;
  double conditional = 0.0;
  double marginal_halfwidth = 0.0;     // bootstrap percentile, 95%
  double conditional_halfwidth = 0.0;  // normal approximation, 95%
};

/**
 * Monte Carlo entropies from per-episode discounted feature histograms with
 * weights (1 - gamma) gamma^t renormalized over the horizon. The conditional
 * estimate averages the per-episode plug-in -KL; the marginal estimate pools
 * the histograms before the KL.
 */
McEntropyEstimate mc_entropy_estimates(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                       const RelativeMeasure& qstar, std::size_t episodes, std::size_t horizon,
                                       Rng& rng, std::size_t bootstrap_resamples = 200);

struct ReturnEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo mean of truncated discounted returns.
double expected_return(const TabularMdp& mdp, const Policy& policy, std::size_t episodes, std::size_t horizon,
                       Rng& rng);
ReturnEstimate expected_return_estimate(const TabularMdp& mdp, const Policy& policy, std::size_t episodes,
                                        std::size_t horizon, Rng& rng);

/// V^pi by a sparse linear solve of (I - gamma P_pi) V = r_pi.
Vector policy_evaluation(const TabularMdp& mdp, const Policy& policy);
/// p0 . V^pi.
double exact_expected_return(const TabularMdp& mdp, const Policy& policy);

/// Optimal value function and a greedy deterministic policy by value iteration.
struct OptimalSolution {
  Vector value;
  Policy policy;
  double expected_return = 0.0;
};
OptimalSolution value_iteration(const TabularMdp& mdp, double tol = 1e-12);

}  // namespace vismax
