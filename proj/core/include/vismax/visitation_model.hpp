#pragma once

#include "vismax/mdp.hpp"
#include "vismax/optim.hpp"
#include "vismax/replay_buffer.hpp"
#include "vismax/visitation_oracle.hpp"

#include <iosfwd>

namespace vismax {

struct VisitationTrainConfig {
  double gamma = 0.95;
  /// Geometric parameter used to draw the lookahead offset; corrected by
  /// importance weights towards gamma.
  double gamma_prime = 0.95;
  std::size_t n_step = 4;
  double learning_rate = 1e-2;
  std::size_t batch_size = 256;
  double polyak_tau = 0.01;
  double weight_clip = 10.0;
  /// Multiply the weight by prod_k pi(a_{t+k}|s_{t+k}) / beta(a_{t+k}|s_{t+k});
  /// needs segments that recorded behavior probabilities.
  bool exact_policy_ratio = false;

  void validate() const;
};

/**
 * Tabular categorical model q_psi(z | s, a): one logit row per (s, a) pair,
 * a target copy refreshed only through sync_target, and the Adam state of the
 * online logits.
 */
class CategoricalVisitationModel {
 public:
  CategoricalVisitationModel(std::size_t n_states, std::size_t n_actions, std::size_t n_features,
                             AdamOptions adam = {});

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_features() const { return static_cast<std::size_t>(logits_.cols()); }
  std::size_t row(std::size_t s, std::size_t a) const;

  const Table& logits() const { return logits_; }
  Table& logits() { return logits_; }
  const Table& target_logits() const { return target_logits_; }
  Adam& optimizer() { return adam_; }

  Vector probs(std::size_t s, std::size_t a) const;
  Vector target_probs(std::size_t s, std::size_t a) const;
  double log_prob(std::size_t s, std::size_t a, std::size_t z) const;
  std::size_t sample_feature(std::size_t s, std::size_t a, Rng& rng) const;
  std::size_t sample_target(std::size_t s, std::size_t a, Rng& rng) const;

  /// target <- tau * online + (1 - tau) * target.
  void sync_target(double tau);

  /// Softmax of the online logits as a conditional table over features.
  ConditionalDistTable as_table() const;

  /// Text dump: "n_states n_actions n_features" then one line of logits per pair.
  void save_text(std::ostream& os) const;
  /// Binary dump: three little-endian uint64 shape fields then little-endian doubles.
  void save_binary(std::ostream& os) const;
  static CategoricalVisitationModel load_text(std::istream& is);
  static CategoricalVisitationModel load_binary(std::istream& is);

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  Table logits_;
  Table target_logits_;
  Adam adam_;
};

/// Lookahead offset Delta >= 1 with Pr(Delta = k) = (1 - g) g^(k - 1).
std::size_t sample_delta(double gamma_prime, Rng& rng);

/// Probability of k under the geometric law with continuation probability g.
double geometric_pmf(double g, std::size_t k);

struct TargetSample {
  std::size_t feature = 0;
  double weight = 0.0;
  /// min(Delta, N): the future entry the sample was anchored at.
  std::size_t offset = 0;
  /// True when the feature came from the target model (Delta > N).
  bool bootstrapped = false;
};

/**
 * Draws zbar from the N-step mixture for one segment. With Delta' = min(Delta, N)
 * and s' the state Delta' steps ahead, a' is drawn from `target_policy` at s'
 * (or taken from the segment when no policy is given); zbar ~ h(.|s',a') when
 * Delta <= N, otherwise zbar ~ softmax(target logits)(.|s',a'). The weight is
 * G_{1-gamma}(Delta) / G_{1-gamma'}(Delta), optionally times the policy ratio
 * product, clamped to [0, weight_clip].
 */
TargetSample sample_target_feature(const NStepSegment& segment, std::size_t delta, const FeatureMap& fmap,
                                   const CategoricalVisitationModel& model, const VisitationTrainConfig& cfg,
                                   Rng& rng, const Policy* target_policy = nullptr);

/// Gradient of w * (-log softmax(logits[s,a])[z]) with respect to logits[s,a].
Vector ce_grad(const CategoricalVisitationModel& model, std::size_t s, std::size_t a, std::size_t z, double w);

/// w * (-log max(softmax(logits[s,a])[z], 1e-12)).
double ce_loss(const CategoricalVisitationModel& model, std::size_t s, std::size_t a, std::size_t z, double w);

/**
 * One Adam step of the cross-entropy surrogate on a uniform batch from the
 * buffer. Returns the mean weighted negative log-likelihood. Throws
 * std::logic_error when the buffer holds fewer than batch_size segments.
 */
double train_step(CategoricalVisitationModel& model, const ReplayBuffer& buffer, const Policy* policy,
                  const FeatureMap& fmap, const VisitationTrainConfig& cfg, Rng& rng);

}  // namespace vismax
