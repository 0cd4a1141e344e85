#pragma once

#include "vismax/types.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vismax {

/// Entry of the sparse successor list of one (s, a) pair.
struct Successor {
  std::size_t state;
  double probability;
};

/**
 * Finite discounted MDP.
 *
 * The transition tensor is stored as an (n_states * n_actions) x n_states
 * table whose row `pair(s, a)` is p(. | s, a). Construction validates every
 * invariant (row-stochastic transitions, normalized p0, gamma in [0, 1)) and
 * throws std::invalid_argument otherwise.
 */
class TabularMdp {
 public:
  TabularMdp(Table transition, Vector p0, Table reward, double gamma);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_pairs() const { return n_states_ * n_actions_; }
  std::size_t pair(std::size_t s, std::size_t a) const { return s * n_actions_ + a; }
  StateAction unpair(std::size_t idx) const { return {idx / n_actions_, idx % n_actions_}; }

  const Table& transition() const { return transition_; }
  const Vector& p0() const { return p0_; }
  const Table& reward() const { return reward_; }
  double gamma() const { return gamma_; }

  /// Non-zero entries of p(. | s, a).
  std::span<const Successor> successors(std::size_t s, std::size_t a) const;

  /// Same dynamics with a different discount factor.
  TabularMdp with_gamma(double gamma) const;
  /// Same dynamics with a different reward table.
  TabularMdp with_reward(Table reward) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  Table transition_;
  Vector p0_;
  Table reward_;
  double gamma_;
  std::vector<std::size_t> succ_offsets_;
  std::vector<Successor> succ_;
};

/// Stochastic mapping h(z | s, a) from state-action pairs to a finite feature space.
class FeatureMap {
 public:
  /// `h` has one row per (s, a) pair in TabularMdp::pair order.
  explicit FeatureMap(Table h);

  std::size_t n_features() const { return static_cast<std::size_t>(h_.cols()); }
  std::size_t n_pairs() const { return static_cast<std::size_t>(h_.rows()); }
  const Table& h() const { return h_; }
  std::span<const double> row(std::size_t pair) const { return row_span(h_, static_cast<Eigen::Index>(pair)); }

  std::size_t sample(std::size_t pair, Rng& rng) const { return sample_categorical(row(pair), rng); }

  /// One-hot feature per (s, a) pair: the map under which feature and
  /// state-action visitation coincide.
  static FeatureMap identity(std::size_t n_pairs);

 private:
  Table h_;
};

struct Trajectory {
  std::vector<std::size_t> states;  // one longer than actions
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
};

/// One replay record: the anchor transition plus the next N (state, action) pairs.
struct NStepSegment {
  std::size_t anchor_state = 0;
  std::size_t anchor_action = 0;
  double reward = 0.0;
  std::vector<StateAction> future;
  /// beta(a_{t+k} | s_{t+k}) of the behavior policy for each future entry;
  /// empty when the behavior probabilities were not recorded.
  std::vector<double> behavior_probs;
  std::size_t time_index = 0;

  std::size_t next_state() const { return future.front().state; }
};

/// Checks row-stochasticity of a policy table against an MDP.
void validate_policy(const TabularMdp& mdp, const Policy& policy);
Policy uniform_policy(std::size_t n_states, std::size_t n_actions);

std::pair<std::size_t, double> step(const TabularMdp& mdp, std::size_t s, std::size_t a, Rng& rng);

std::size_t sample_initial_state(const TabularMdp& mdp, Rng& rng);

Trajectory sample_episode(const TabularMdp& mdp, const Policy& policy, std::size_t horizon, Rng& rng);

/// Segments for every anchor whose N-step future lies inside the trajectory.
/// `policy`, when given, fills NStepSegment::behavior_probs.
std::vector<NStepSegment> make_segments(const Trajectory& traj, std::size_t n_step,
                                        const Policy* behavior = nullptr);

}  // namespace vismax
