#pragma once

#include "vismax/config.hpp"
#include "vismax/gridworld.hpp"
#include "vismax/intrinsic_reward.hpp"
#include "vismax/metrics.hpp"
#include "vismax/replay_buffer.hpp"
#include "vismax/sac_agent.hpp"
#include "vismax/visitation_model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace vismax {

/// Per-iteration training diagnostics.
struct IterationStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double visitation_loss = 0.0;
  double mean_intrinsic = 0.0;
  bool updated = false;
};

/**
 * One training run of a single strategy and seed on the configured layout.
 * Each iteration collects env_steps_per_iter transitions into the FIFO buffer,
 * trains the visitation model (CV) or the marginal density (MV), then runs the
 * critic updates, one actor update and the Polyak updates.
 */
class Trainer {
 public:
  Trainer(const RunConfig& cfg, Strategy strategy, std::uint64_t seed);

  IterationStats iterate();
  MetricRecord evaluate() const;

  std::size_t iteration() const { return iteration_; }
  std::size_t env_steps() const { return env_steps_; }
  Strategy strategy() const { return strategy_; }
  std::uint64_t seed() const { return seed_; }

  const Gridworld& world() const { return world_; }
  const SoftmaxPolicy& policy() const { return policy_; }
  SoftmaxPolicy& policy() { return policy_; }
  const CriticTable& critic() const { return critic_; }
  const CategoricalVisitationModel& visitation_model() const { return model_; }
  const MarginalDensityModel& density() const { return density_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const RewardConfig& reward_config() const { return reward_; }

  /// Text dump of the policy logits, critic and visitation model tables.
  void save_checkpoint(std::ostream& os) const;

 private:
  void collect(std::vector<MarginalDensityModel::WeightedFeature>& visits);
  double intrinsic_reward(const NStepSegment& seg);
  void reset_episode();

  RunConfig cfg_;
  Strategy strategy_;
  std::uint64_t seed_;
  Gridworld world_;
  RewardConfig reward_;
  Rng rng_;
  SoftmaxPolicy policy_;
  CriticTable critic_;
  CategoricalVisitationModel model_;
  MarginalDensityModel density_;
  ReplayBuffer buffer_;

  // Episode in progress.
  Trajectory episode_;
  std::vector<double> episode_probs_;

  std::size_t iteration_ = 0;
  std::size_t env_steps_ = 0;
};

/// Seeds derived from the master seed, independent of the strategy.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/**
 * Runs `cfg.iterations` iterations and emits a record at iteration 0, every
 * eval_interval iterations and at the final iteration.
 */
std::vector<MetricRecord> train(const RunConfig& cfg, Strategy strategy, std::uint64_t seed,
                                const std::function<void(const MetricRecord&)>& sink = {});

}  // namespace vismax
