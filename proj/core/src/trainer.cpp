#include "vismax/trainer.hpp"

#include <cmath>
#include <ostream>

namespace vismax {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Trainer::Trainer(const RunConfig& cfg, Strategy strategy, std::uint64_t seed)
    : cfg_(cfg),
      strategy_(strategy),
      seed_(seed),
      world_(build_gridworld(cfg.grid_spec(), cfg.sac.gamma)),
      rng_(make_rng(seed, kTrainStream)),
      policy_(world_.mdp.n_states(), world_.mdp.n_actions(), AdamOptions{.learning_rate = cfg.sac.actor_lr}),
      critic_(world_.mdp.n_states(), world_.mdp.n_actions(), AdamOptions{.learning_rate = cfg.sac.critic_lr},
              cfg.sac.critic_init),
      model_(world_.mdp.n_states(), world_.mdp.n_actions(), world_.n_features(),
             AdamOptions{.learning_rate = cfg.visitation.learning_rate}),
      density_(world_.n_features(), cfg.mv_decay),
      buffer_(cfg.sac.buffer_capacity) {
  cfg_.validate();
  reward_ = cfg_.reward;
  reward_.strategy = strategy;
  reward_.qstar = RelativeMeasure::uniform(world_.n_features());
  reward_.validate();
  reset_episode();
}

void Trainer::reset_episode() {
  episode_ = Trajectory{};
  episode_probs_.clear();
  episode_.states.push_back(sample_initial_state(world_.mdp, rng_));
}

void Trainer::collect(std::vector<MarginalDensityModel::WeightedFeature>& visits) {
  const std::size_t n = cfg_.sac.n_step;
  const TabularMdp& mdp = world_.mdp;
  for (std::size_t i = 0; i < cfg_.sac.env_steps_per_iter; ++i) {
    const std::size_t s = episode_.states.back();
    const std::size_t a = act(policy_, s, rng_);
    episode_probs_.push_back(std::exp(policy_.log_prob(s, a)));
    const auto [next, r] = step(mdp, s, a, rng_);
    const std::size_t t = episode_.actions.size();
    episode_.actions.push_back(a);
    episode_.rewards.push_back(r);
    episode_.states.push_back(next);
    ++env_steps_;

    if (strategy_ == Strategy::MV)
      visits.push_back({world_.features.sample(mdp.pair(s, a), rng_), std::pow(cfg_.sac.gamma, static_cast<double>(t))});

    // The segment anchored N steps back is now complete.
    if (t >= n) {
      const std::size_t anchor = t - n;
      NStepSegment seg;
      seg.anchor_state = episode_.states[anchor];
      seg.anchor_action = episode_.actions[anchor];
      seg.reward = episode_.rewards[anchor];
      seg.time_index = anchor;
      seg.future.reserve(n);
      seg.behavior_probs.reserve(n);
      for (std::size_t k = 1; k <= n; ++k) {
        seg.future.push_back({episode_.states[anchor + k], episode_.actions[anchor + k]});
        seg.behavior_probs.push_back(episode_probs_[anchor + k]);
      }
      buffer_.push(std::move(seg));
    }

    if (episode_.actions.size() >= cfg_.sac.horizon) reset_episode();
  }
}

double Trainer::intrinsic_reward(const NStepSegment& seg) {
  switch (strategy_) {
    case Strategy::CV:
      return cv_reward(model_, reward_, seg.anchor_state, seg.anchor_action, rng_);
    case Strategy::MV: {
      const std::size_t z = world_.features.sample(world_.mdp.pair(seg.anchor_state, seg.anchor_action), rng_);
      return mv_reward(density_, reward_, z);
    }
    case Strategy::SAC:
      break;
  }
  return 0.0;
}

IterationStats Trainer::iterate() {
  IterationStats stats;
  std::vector<MarginalDensityModel::WeightedFeature> visits;
  collect(visits);
  ++iteration_;
  if (strategy_ == Strategy::MV) density_.update(visits);

  const std::size_t need = std::max(cfg_.sac.batch_size, strategy_ == Strategy::CV ? cfg_.visitation.batch_size : 0);
  if (buffer_.size() < need || env_steps_ < cfg_.sac.warmup_steps) return stats;
  stats.updated = true;

  if (strategy_ == Strategy::CV) {
    const Policy pi = policy_.table();
    for (std::size_t k = 0; k < cfg_.sac.visitation_updates_per_iter; ++k)
      stats.visitation_loss = train_step(model_, buffer_, &pi, world_.features, cfg_.visitation, rng_);
  }

  const std::size_t b = cfg_.sac.batch_size;
  std::vector<const NStepSegment*> batch(b);
  std::vector<double> rewards(b);
  double intrinsic_sum = 0.0;
  for (std::size_t k = 0; k < cfg_.sac.critic_updates_per_iter; ++k) {
    const auto idx = buffer_.sample_indices(b, rng_);
    for (std::size_t i = 0; i < b; ++i) {
      batch[i] = &buffer_.at(idx[i]);
      const double intr = intrinsic_reward(*batch[i]);
      intrinsic_sum += intr;
      rewards[i] = total_reward(reward_, batch[i]->reward, intr);
    }
    stats.critic_loss = critic_update(critic_, policy_, batch, rewards, cfg_.sac, rng_);
  }
  if (cfg_.sac.critic_updates_per_iter > 0)
    stats.mean_intrinsic = intrinsic_sum / static_cast<double>(b * cfg_.sac.critic_updates_per_iter);

  const auto idx = buffer_.sample_indices(b, rng_);
  for (std::size_t i = 0; i < b; ++i) batch[i] = &buffer_.at(idx[i]);
  stats.actor_loss = actor_update(critic_, policy_, batch, cfg_.sac, rng_);

  critic_.sync_target(cfg_.sac.polyak_tau);
  if (strategy_ == Strategy::CV) model_.sync_target(cfg_.visitation.polyak_tau);
  return stats;
}

MetricRecord Trainer::evaluate() const {
  MetricRecord rec;
  rec.iteration = iteration_;
  rec.env_steps = env_steps_;
  rec.strategy = to_string(strategy_);
  rec.layout = world_.spec.layout_name;
  rec.seed = seed_;

  const Policy pi = policy_.table();
  const TabularMdp& mdp = world_.mdp;
  if (cfg_.metrics.estimator == Estimator::Exact) {
    rec.marginal_entropy = marginal_feature_entropy(mdp, pi, world_.features, reward_.qstar);
    rec.conditional_entropy = conditional_feature_entropy(mdp, pi, world_.features, reward_.qstar);
    rec.expected_return = exact_expected_return(mdp, pi);
  } else {
    Rng eval_rng = make_rng(seed_ ^ (static_cast<std::uint64_t>(iteration_) << 20), kEvalStream);
    const std::size_t horizon = cfg_.mc_horizon();
    const McEntropyEstimate est =
        mc_entropy_estimates(mdp, pi, world_.features, reward_.qstar, cfg_.metrics.mc_episodes, horizon, eval_rng, 0);
    rec.marginal_entropy = est.marginal;
    rec.conditional_entropy = est.conditional;
    rec.expected_return = expected_return(mdp, pi, cfg_.metrics.mc_episodes, horizon, eval_rng);
  }
  return rec;
}

void Trainer::save_checkpoint(std::ostream& os) const {
  const auto dump = [&os](const char* name, const Table& t) {
    os << name << " " << t.rows() << " " << t.cols() << "\n";
    os.precision(17);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) os << (c ? " " : "") << t(r, c);
      os << "\n";
    }
  };
  dump("policy_logits", policy_.logits());
  dump("critic_q", critic_.q());
  dump("critic_target_q", critic_.target_q());
  os << "visitation_model\n";
  model_.save_text(os);
}

std::vector<MetricRecord> train(const RunConfig& cfg, Strategy strategy, std::uint64_t seed,
                                const std::function<void(const MetricRecord&)>& sink) {
  Trainer trainer(cfg, strategy, seed);
  std::vector<MetricRecord> out;
  const auto emit = [&] {
    out.push_back(trainer.evaluate());
    if (sink) sink(out.back());
  };
  emit();
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    trainer.iterate();
    if (it % cfg.eval_interval == 0 || it == cfg.iterations) emit();
  }
  return out;
}

}  // namespace vismax
