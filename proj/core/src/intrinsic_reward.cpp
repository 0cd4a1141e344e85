#include "vismax/intrinsic_reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace vismax {

namespace {
constexpr double kDensityFloor = 1e-12;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::SAC: return "SAC";
    case Strategy::MV: return "MV";
    case Strategy::CV: return "CV";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "SAC") return Strategy::SAC;
  if (upper == "MV") return Strategy::MV;
  if (upper == "CV") return Strategy::CV;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected SAC, MV or CV)");
}

void RewardConfig::validate() const {
  if (!(clip_min <= clip_max)) throw std::invalid_argument("clip_min must not exceed clip_max");
  qstar.validate();
}

MarginalDensityModel::MarginalDensityModel(std::size_t n_features, double decay)
    : probs_(Vector::Constant(static_cast<Eigen::Index>(n_features), 1.0 / static_cast<double>(n_features))),
      decay_(decay) {
  if (n_features == 0) throw std::invalid_argument("density model needs at least one feature");
  if (!(decay >= 0.0 && decay <= 1.0)) throw std::invalid_argument("density decay must lie in [0, 1]");
}

void MarginalDensityModel::set_probs(Vector probs) {
  if (probs.size() != probs_.size()) throw std::invalid_argument("density size mismatch");
  probs_ = std::move(probs);
}

void MarginalDensityModel::update(std::span<const WeightedFeature> batch) {
  Vector hist = Vector::Zero(probs_.size());
  for (const auto& wf : batch) {
    if (wf.weight < 0.0) throw std::invalid_argument("density update weights must be non-negative");
    if (wf.feature >= static_cast<std::size_t>(probs_.size())) throw std::out_of_range("feature index out of range");
    hist(static_cast<Eigen::Index>(wf.feature)) += wf.weight;
  }
  const double total = hist.sum();
  if (total <= 0.0) return;
  probs_ = decay_ * probs_ + (1.0 - decay_) * (hist / total);
  probs_ = probs_.cwiseMax(kDensityFloor);
  probs_ /= probs_.sum();
}

double cv_reward(const CategoricalVisitationModel& model, const RewardConfig& cfg, std::size_t s, std::size_t a,
                 Rng& rng) {
  const std::size_t z = model.sample_feature(s, a, rng);
  const double raw = std::log(cfg.qstar.probs(static_cast<Eigen::Index>(z))) - model.log_prob(s, a, z);
  return std::clamp(raw, cfg.clip_min, cfg.clip_max);
}

double cv_reward_expectation(const CategoricalVisitationModel& model, const RewardConfig& cfg, std::size_t s,
                             std::size_t a) {
  const Vector p = model.probs(s, a);
  return -kl_divergence(p, cfg.qstar.probs);
}

double mv_reward(const MarginalDensityModel& density, const RewardConfig& cfg, std::size_t z) {
  if (z >= static_cast<std::size_t>(density.probs().size())) throw std::out_of_range("feature index out of range");
  const double p = std::max(density.probs()(static_cast<Eigen::Index>(z)), kDensityFloor);
  const double raw = std::log(cfg.qstar.probs(static_cast<Eigen::Index>(z))) - std::log(p);
  return std::clamp(raw, cfg.clip_min, cfg.clip_max);
}

double total_reward(const RewardConfig& cfg, double extrinsic, double intrinsic) {
  return cfg.lambda_r * extrinsic + cfg.lambda * intrinsic;
}

}  // namespace vismax
