#pragma once

#include "vismax/visitation_model.hpp"
#include "vismax/visitation_oracle.hpp"

#include <string>
#include <vector>

namespace vismax {

/// Exploration bonus: policy entropy only, marginal visitation, conditional visitation.
enum class Strategy { SAC, MV, CV };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct RewardConfig {
  Strategy strategy = Strategy::CV;
  double lambda = 1.0;    // intrinsic weight
  double lambda_r = 0.0;  // extrinsic weight
  double clip_min = -10.0;
  double clip_max = 10.0;
  RelativeMeasure qstar;

  void validate() const;
};

/// Categorical marginal feature density for the MV bonus, tracked as an
/// exponential moving average of discount-weighted visit histograms.
class MarginalDensityModel {
 public:
  MarginalDensityModel(std::size_t n_features, double decay);

  struct WeightedFeature {
    std::size_t feature;
    double weight;
  };

  /// probs <- decay * probs + (1 - decay) * normalized histogram, floored at
  /// 1e-12 and renormalized. A batch with zero total weight is a no-op.
  void update(std::span<const WeightedFeature> batch);

  const Vector& probs() const { return probs_; }
  double decay() const { return decay_; }
  void set_probs(Vector probs);

 private:
  Vector probs_;
  double decay_;
};

/// Single-sample estimate log q*(z) - log q_psi(z|s,a) with z ~ q_psi(.|s,a), clipped.
double cv_reward(const CategoricalVisitationModel& model, const RewardConfig& cfg, std::size_t s, std::size_t a,
                 Rng& rng);

/// Exact expectation of the unclipped CV estimate: -KL(q_psi(.|s,a) || q*).
double cv_reward_expectation(const CategoricalVisitationModel& model, const RewardConfig& cfg, std::size_t s,
                             std::size_t a);

/// log q*(z) - log density(z), clipped.
double mv_reward(const MarginalDensityModel& density, const RewardConfig& cfg, std::size_t z);

double total_reward(const RewardConfig& cfg, double extrinsic, double intrinsic);

}  // namespace vismax
