#pragma once

#include "vismax/mdp.hpp"
#include "vismax/optim.hpp"

#include <span>
#include <string>
#include <vector>

namespace vismax {

/// Baseline subtracted from the actor's advantage.
enum class ActorCentering {
  None,
  Batch,  // mean advantage over the batch
  State,  // soft value V(s) = sum_a pi(a|s) (Q(s,a) - lambda_sac log pi(a|s))
};

std::string to_string(ActorCentering c);
/// Accepts none/batch/state and the booleans false/true (true means batch).
ActorCentering parse_actor_centering(const std::string& name);

struct SacParams {
  double lambda_sac = 0.05;
  double gamma = 0.95;
  double polyak_tau = 0.01;
  double critic_lr = 1e-2;
  double actor_lr = 1e-2;
  std::size_t batch_size = 256;
  std::size_t critic_updates_per_iter = 1;
  std::size_t visitation_updates_per_iter = 1;
  ActorCentering actor_centering = ActorCentering::None;
  std::size_t env_steps_per_iter = 100;
  std::size_t horizon = 100;
  std::size_t n_step = 4;
  std::size_t buffer_capacity = 100000;
  /// Initial value of every critic entry (online and target).
  double critic_init = 0.0;
  /// Steps collected before the first iteration to fill the buffer.
  std::size_t warmup_steps = 0;

  void validate() const;
};

/// Tabular softmax policy pi_theta(a|s) = softmax(logits[s])[a].
class SoftmaxPolicy {
 public:
  SoftmaxPolicy(std::size_t n_states, std::size_t n_actions, AdamOptions adam = {});

  std::size_t n_states() const { return static_cast<std::size_t>(logits_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(logits_.cols()); }
  const Table& logits() const { return logits_; }
  Table& logits() { return logits_; }
  Adam& optimizer() { return adam_; }

  Vector probs(std::size_t s) const;
  double log_prob(std::size_t s, std::size_t a) const;
  /// Full pi table (n_states x n_actions).
  Policy table() const;

 private:
  Table logits_;
  Adam adam_;
};

/// Action-value table Q_phi with its Polyak-averaged target copy.
class CriticTable {
 public:
  CriticTable(std::size_t n_states, std::size_t n_actions, AdamOptions adam = {}, double init = 0.0);

  const Table& q() const { return q_; }
  Table& q() { return q_; }
  const Table& target_q() const { return target_q_; }
  Adam& optimizer() { return adam_; }
  void sync_target(double tau) { polyak(target_q_, q_, tau); }

 private:
  Table q_;
  Table target_q_;
  Adam adam_;
};

std::size_t act(const SoftmaxPolicy& policy, std::size_t s, Rng& rng);

/// One squared-error term (Q(s,a) - y)^2 with y held constant.
struct CriticItem {
  std::size_t state;
  std::size_t action;
  double target;
};

/// Mean of (Q(s,a) - y)^2 over the items; fills `grad` (same shape as q) with
/// 2 (Q - y) / B at each visited cell when non-null.
double critic_loss(const Table& q, std::span<const CriticItem> items, Table* grad);

/// y = r + gamma (Q'(s', a'') - lambda_sac log pi(a''|s')) for a sampled a'' ~ pi(.|s').
double soft_target(const CriticTable& critic, const SoftmaxPolicy& policy, std::size_t next_state, double reward,
                   const SacParams& params, Rng& rng);

/**
 * Samples a'' per item, builds the soft targets from the target critic and
 * applies one Adam step to the mean squared error. `rewards_total` already
 * combines extrinsic and intrinsic terms. Returns the pre-step loss.
 */
double critic_update(CriticTable& critic, const SoftmaxPolicy& policy, std::span<const NStepSegment* const> batch,
                     std::span<const double> rewards_total, const SacParams& params, Rng& rng);

/// One score-function term: -weight * advantage * log pi(action|state).
struct ActorItem {
  std::size_t state;
  std::size_t action;
  double advantage;
  double weight;
};

/// Mean of -w A log pi(a|s) with A and w constants; fills `grad` with the
/// logit gradient when non-null.
double actor_loss(const Table& logits, std::span<const ActorItem> items, Table* grad);

/**
 * Log-trick actor step: a' ~ pi(.|s_t), A = Q(s_t,a') - lambda_sac log pi(a'|s_t),
 * time weights gamma^(t - t_min) with t_min the smallest time index in the
 * batch, optional centering of A (see ActorCentering). Returns the pre-step loss.
 */
double actor_update(const CriticTable& critic, SoftmaxPolicy& policy, std::span<const NStepSegment* const> batch,
                    const SacParams& params, Rng& rng);

}  // namespace vismax
