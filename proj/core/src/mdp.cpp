#include "vismax/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vismax {

namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution(std::span<const double> row, const char* what, std::size_t index) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument(std::string(what) + " row " + std::to_string(index) +
                                  " has a negative or NaN entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    throw std::invalid_argument(std::string(what) + " row " + std::to_string(index) + " sums to " +
                                std::to_string(sum));
  }
}

}  // namespace

TabularMdp::TabularMdp(Table transition, Vector p0, Table reward, double gamma)
    : n_states_(static_cast<std::size_t>(reward.rows())),
      n_actions_(static_cast<std::size_t>(reward.cols())),
      transition_(std::move(transition)),
      p0_(std::move(p0)),
      reward_(std::move(reward)),
      gamma_(gamma) {
  if (n_states_ == 0 || n_actions_ == 0) throw std::invalid_argument("MDP needs at least one state and action");
  if (static_cast<std::size_t>(transition_.rows()) != n_pairs() ||
      static_cast<std::size_t>(transition_.cols()) != n_states_) {
    throw std::invalid_argument("transition table must be (n_states*n_actions) x n_states");
  }
  if (static_cast<std::size_t>(p0_.size()) != n_states_) throw std::invalid_argument("p0 size mismatch");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!reward_.allFinite()) throw std::invalid_argument("reward table must be finite");

  for (std::size_t i = 0; i < n_pairs(); ++i) check_distribution(row_span(transition_, i), "transition", i);
  check_distribution({p0_.data(), n_states_}, "p0", 0);

  succ_offsets_.reserve(n_pairs() + 1);
  succ_offsets_.push_back(0);
  for (std::size_t i = 0; i < n_pairs(); ++i) {
    for (std::size_t s2 = 0; s2 < n_states_; ++s2) {
      const double p = transition_(i, s2);
      if (p > 0.0) succ_.push_back({s2, p});
    }
    succ_offsets_.push_back(succ_.size());
  }
}

std::span<const Successor> TabularMdp::successors(std::size_t s, std::size_t a) const {
  const std::size_t i = pair(s, a);
  return {succ_.data() + succ_offsets_[i], succ_offsets_[i + 1] - succ_offsets_[i]};
}

TabularMdp TabularMdp::with_gamma(double gamma) const { return TabularMdp(transition_, p0_, reward_, gamma); }

TabularMdp TabularMdp::with_reward(Table reward) const {
  return TabularMdp(transition_, p0_, std::move(reward), gamma_);
}

FeatureMap::FeatureMap(Table h) : h_(std::move(h)) {
  if (h_.rows() == 0 || h_.cols() == 0) throw std::invalid_argument("feature map must be non-empty");
  for (Eigen::Index i = 0; i < h_.rows(); ++i) check_distribution(row_span(h_, i), "feature map", i);
}

FeatureMap FeatureMap::identity(std::size_t n_pairs) {
  Table h = Table::Identity(static_cast<Eigen::Index>(n_pairs), static_cast<Eigen::Index>(n_pairs));
  return FeatureMap(std::move(h));
}

void validate_policy(const TabularMdp& mdp, const Policy& policy) {
  if (static_cast<std::size_t>(policy.rows()) != mdp.n_states() ||
      static_cast<std::size_t>(policy.cols()) != mdp.n_actions()) {
    throw std::invalid_argument("policy shape does not match the MDP");
  }
  for (Eigen::Index s = 0; s < policy.rows(); ++s) {
    double sum = 0.0;
    for (Eigen::Index a = 0; a < policy.cols(); ++a) {
      if (!(policy(s, a) >= 0.0)) throw std::invalid_argument("policy has a negative entry");
      sum += policy(s, a);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("policy row does not sum to 1");
  }
}

Policy uniform_policy(std::size_t n_states, std::size_t n_actions) {
  return Policy::Constant(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions),
                          1.0 / static_cast<double>(n_actions));
}

std::pair<std::size_t, double> step(const TabularMdp& mdp, std::size_t s, std::size_t a, Rng& rng) {
  if (s >= mdp.n_states() || a >= mdp.n_actions()) throw std::out_of_range("state or action index out of range");
  const auto succ = mdp.successors(s, a);
  std::size_t next = succ.back().state;
  if (succ.size() > 1) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& e : succ) {
      acc += e.probability;
      if (u < acc) {
        next = e.state;
        break;
      }
    }
  }
  return {next, mdp.reward()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a))};
}

std::size_t sample_initial_state(const TabularMdp& mdp, Rng& rng) {
  return sample_categorical({mdp.p0().data(), mdp.n_states()}, rng);
}

Trajectory sample_episode(const TabularMdp& mdp, const Policy& policy, std::size_t horizon, Rng& rng) {
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);
  std::size_t s = sample_initial_state(mdp, rng);
  traj.states.push_back(s);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t a = sample_categorical(row_span(policy, static_cast<Eigen::Index>(s)), rng);
    const auto [next, r] = step(mdp, s, a, rng);
    traj.actions.push_back(a);
    traj.rewards.push_back(r);
    traj.states.push_back(next);
    s = next;
  }
  return traj;
}

std::vector<NStepSegment> make_segments(const Trajectory& traj, std::size_t n_step, const Policy* behavior) {
  if (n_step == 0) throw std::invalid_argument("segment length N must be positive");
  std::vector<NStepSegment> out;
  const std::size_t n_actions = traj.actions.size();
  if (n_actions <= n_step) return out;
  out.reserve(n_actions - n_step);
  for (std::size_t t = 0; t + n_step < n_actions; ++t) {
    NStepSegment seg;
    seg.anchor_state = traj.states[t];
    seg.anchor_action = traj.actions[t];
    seg.reward = traj.rewards[t];
    seg.time_index = t;
    seg.future.reserve(n_step);
    for (std::size_t k = 1; k <= n_step; ++k) {
      seg.future.push_back({traj.states[t + k], traj.actions[t + k]});
      if (behavior != nullptr) {
        seg.behavior_probs.push_back(
            (*behavior)(static_cast<Eigen::Index>(traj.states[t + k]), static_cast<Eigen::Index>(traj.actions[t + k])));
      }
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace vismax
