#include "vismax/sac_agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vismax {

void SacParams::validate() const {
  if (!(lambda_sac >= 0.0)) throw std::invalid_argument("lambda_sac must be non-negative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(polyak_tau >= 0.0 && polyak_tau <= 1.0)) throw std::invalid_argument("polyak_tau must lie in [0, 1]");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (n_step == 0) throw std::invalid_argument("n_step must be positive");
  if (n_step >= horizon) throw std::invalid_argument("n_step must be smaller than the horizon");
  if (buffer_capacity == 0) throw std::invalid_argument("buffer_capacity must be positive");
}

std::string to_string(ActorCentering c) {
  switch (c) {
    case ActorCentering::Batch:
      return "batch";
    case ActorCentering::State:
      return "state";
    case ActorCentering::None:
      break;
  }
  return "none";
}

ActorCentering parse_actor_centering(const std::string& name) {
  std::string l;
  for (char ch : name) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (l == "none" || l == "false" || l == "0" || l == "no" || l == "off") return ActorCentering::None;
  if (l == "batch" || l == "true" || l == "1" || l == "yes" || l == "on") return ActorCentering::Batch;
  if (l == "state") return ActorCentering::State;
  throw std::invalid_argument("actor centering must be none, batch or state, got '" + name + "'");
}

SoftmaxPolicy::SoftmaxPolicy(std::size_t n_states, std::size_t n_actions, AdamOptions adam)
    : logits_(Table::Zero(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions))),
      adam_(logits_.size(), adam) {}

Vector SoftmaxPolicy::probs(std::size_t s) const {
  Vector p(logits_.cols());
  softmax_row(logits_.data() + s * n_actions(), n_actions(), p.data());
  return p;
}

double SoftmaxPolicy::log_prob(std::size_t s, std::size_t a) const {
  const double* l = logits_.data() + s * n_actions();
  double mx = l[0];
  for (std::size_t k = 1; k < n_actions(); ++k) mx = std::max(mx, l[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_actions(); ++k) sum += std::exp(l[k] - mx);
  return l[a] - mx - std::log(sum);
}

Policy SoftmaxPolicy::table() const {
  Policy p(logits_.rows(), logits_.cols());
  for (Eigen::Index s = 0; s < logits_.rows(); ++s)
    softmax_row(logits_.data() + s * logits_.cols(), n_actions(), p.data() + s * p.cols());
  return p;
}

CriticTable::CriticTable(std::size_t n_states, std::size_t n_actions, AdamOptions adam, double init)
    : q_(Table::Constant(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions), init)),
      target_q_(q_),
      adam_(q_.size(), adam) {}

std::size_t act(const SoftmaxPolicy& policy, std::size_t s, Rng& rng) {
  if (s >= policy.n_states()) throw std::out_of_range("state index out of range");
  const Vector p = policy.probs(s);
  return sample_categorical({p.data(), static_cast<std::size_t>(p.size())}, rng);
}

double critic_loss(const Table& q, std::span<const CriticItem> items, Table* grad) {
  if (items.empty()) throw std::invalid_argument("critic batch is empty");
  const double inv_b = 1.0 / static_cast<double>(items.size());
  if (grad != nullptr) *grad = Table::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (const auto& it : items) {
    const auto s = static_cast<Eigen::Index>(it.state);
    const auto a = static_cast<Eigen::Index>(it.action);
    const double err = q(s, a) - it.target;
    loss += err * err;
    if (grad != nullptr) (*grad)(s, a) += 2.0 * err * inv_b;
  }
  return loss * inv_b;
}

double soft_target(const CriticTable& critic, const SoftmaxPolicy& policy, std::size_t next_state, double reward,
                   const SacParams& params, Rng& rng) {
  const std::size_t a_next = act(policy, next_state, rng);
  const double q_next = critic.target_q()(static_cast<Eigen::Index>(next_state), static_cast<Eigen::Index>(a_next));
  return reward + params.gamma * (q_next - params.lambda_sac * policy.log_prob(next_state, a_next));
}

double critic_update(CriticTable& critic, const SoftmaxPolicy& policy, std::span<const NStepSegment* const> batch,
                     std::span<const double> rewards_total, const SacParams& params, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("critic batch is empty");
  if (rewards_total.size() != batch.size()) throw std::invalid_argument("one total reward per batch item is required");
  std::vector<CriticItem> items;
  items.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const NStepSegment& seg = *batch[i];
    items.push_back({seg.anchor_state, seg.anchor_action,
                     soft_target(critic, policy, seg.next_state(), rewards_total[i], params, rng)});
  }
  Table grad;
  const double loss = critic_loss(critic.q(), items, &grad);
  critic.optimizer().step(critic.q(), grad);
  return loss;
}

double actor_loss(const Table& logits, std::span<const ActorItem> items, Table* grad) {
  if (items.empty()) throw std::invalid_argument("actor batch is empty");
  const auto n_actions = static_cast<std::size_t>(logits.cols());
  const double inv_b = 1.0 / static_cast<double>(items.size());
  if (grad != nullptr) *grad = Table::Zero(logits.rows(), logits.cols());
  Vector p(logits.cols());
  double loss = 0.0;
  for (const auto& it : items) {
    const auto s = static_cast<Eigen::Index>(it.state);
    softmax_row(logits.data() + it.state * n_actions, n_actions, p.data());
    const double coef = it.weight * it.advantage;
    loss -= coef * std::log(p(static_cast<Eigen::Index>(it.action)));
    if (grad != nullptr) {
      // d/dlogits of -coef log softmax(l)[a] = -coef (onehot(a) - p)
      p(static_cast<Eigen::Index>(it.action)) -= 1.0;
      grad->row(s) += coef * inv_b * p.transpose();
    }
  }
  return loss * inv_b;
}

double actor_update(const CriticTable& critic, SoftmaxPolicy& policy, std::span<const NStepSegment* const> batch,
                    const SacParams& params, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("actor batch is empty");
  std::size_t t_min = std::numeric_limits<std::size_t>::max();
  for (const auto* seg : batch) t_min = std::min(t_min, seg->time_index);

  std::vector<ActorItem> items;
  items.reserve(batch.size());
  for (const auto* seg : batch) {
    const std::size_t s = seg->anchor_state;
    const std::size_t a = act(policy, s, rng);
    const double adv = critic.q()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) -
                       params.lambda_sac * policy.log_prob(s, a);
    const double w = std::pow(params.gamma, static_cast<double>(seg->time_index - t_min));
    items.push_back({s, a, adv, w});
  }
  if (params.actor_centering == ActorCentering::Batch) {
    double mean = 0.0;
    for (const auto& it : items) mean += it.advantage;
    mean /= static_cast<double>(items.size());
    for (auto& it : items) it.advantage -= mean;
  } else if (params.actor_centering == ActorCentering::State) {
    for (auto& it : items) {
      const Vector p = policy.probs(it.state);
      double v = 0.0;
      for (Eigen::Index b = 0; b < p.size(); ++b)
        if (p(b) > 0.0)
          v += p(b) * (critic.q()(static_cast<Eigen::Index>(it.state), b) - params.lambda_sac * std::log(p(b)));
      it.advantage -= v;
    }
  }
  Table grad;
  const double loss = actor_loss(policy.logits(), items, &grad);
  policy.optimizer().step(policy.logits(), grad);
  return loss;
}

}  // namespace vismax
