#include <doctest.h>

#include "vismax/intrinsic_reward.hpp"

using namespace vismax;

namespace {

RewardConfig uniform_cfg(std::size_t k) {
  RewardConfig cfg;
  cfg.qstar = RelativeMeasure::uniform(k);
  return cfg;
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {Strategy::SAC, Strategy::MV, Strategy::CV}) CHECK(parse_strategy(to_string(s)) == s);
  CHECK(parse_strategy("cv") == Strategy::CV);
  CHECK_THROWS(parse_strategy("PPO"));
}

TEST_CASE("cv reward") {
  CategoricalVisitationModel model(2, 2, 4);
  auto cfg = uniform_cfg(4);
  Rng rng(1);

  SUBCASE("uniform model against uniform q* gives 0") {
    for (int i = 0; i < 20; ++i) CHECK(cv_reward(model, cfg, 1, 0, rng) == doctest::Approx(0.0));
    CHECK(cv_reward_expectation(model, cfg, 0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("concentrated model is clipped at clip_min") {
    cfg.qstar = RelativeMeasure::uniform(4);
    cfg.qstar.probs << 1e-8, 1e-8, 1e-8, 1.0 - 3e-8;
    model.logits()(0, 0) = 40.0;  // all mass on feature 0: raw = log 1e-8 - log 1 < -10
    CHECK(cv_reward(model, cfg, 0, 0, rng) == -10.0);
  }
  SUBCASE("single-sample estimate is unbiased") {
    Rng init(2);
    for (Eigen::Index i = 0; i < model.logits().size(); ++i) model.logits().data()[i] = 3.0 * uniform01(init);
    const std::size_t n = 100000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = cv_reward(model, cfg, 1, 1, rng);
      sum += r;
      sq += r * r;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - cv_reward_expectation(model, cfg, 1, 1)) < 3 * se);
  }
  SUBCASE("expectation is entropy minus log K under uniform q*") {
    Rng init(3);
    for (Eigen::Index i = 0; i < model.logits().size(); ++i) model.logits().data()[i] = 2.0 * uniform01(init);
    Vector p = model.probs(0, 1);
    const double entropy = -(p.array() * p.array().log()).sum();
    CHECK(cv_reward_expectation(model, cfg, 0, 1) == doctest::Approx(entropy - std::log(4.0)));
    CHECK(cv_reward_expectation(model, cfg, 0, 1) <= 0.0);
  }
}

TEST_CASE("mv reward") {
  auto cfg = uniform_cfg(8);
  MarginalDensityModel density(8, 0.9);
  CHECK(mv_reward(density, cfg, 3) == doctest::Approx(0.0));

  Vector p = Vector::Constant(8, 0.75 / 7.0);
  p(2) = 0.25;
  density.set_probs(p);
  CHECK(mv_reward(density, cfg, 2) == doctest::Approx(-std::log(2.0)));

  Vector spike = Vector::Zero(8);
  spike(0) = 1.0;
  density.set_probs(spike);
  const double r = mv_reward(density, cfg, 5);
  CHECK(std::isfinite(r));
  CHECK(r == cfg.clip_max);
}

TEST_CASE("marginal density updates") {
  SUBCASE("decay 0 copies the histogram") {
    MarginalDensityModel d(4, 0.0);
    std::vector<MarginalDensityModel::WeightedFeature> batch{{2, 1.0}};
    d.update(batch);
    CHECK(d.probs()(2) == doctest::Approx(1.0));
    CHECK(d.probs()(0) > 0.0);
    CHECK(d.probs().sum() == doctest::Approx(1.0));
  }
  SUBCASE("decay 1 or an empty batch leaves it unchanged") {
    MarginalDensityModel d(4, 1.0);
    const Vector before = d.probs();
    d.update({});
    std::vector<MarginalDensityModel::WeightedFeature> batch{{1, 1.0}};
    d.update(batch);
    CHECK(d.probs() == before);
    MarginalDensityModel z(4, 0.5);
    std::vector<MarginalDensityModel::WeightedFeature> zero{{1, 0.0}};
    const Vector zb = z.probs();
    z.update(zero);
    CHECK(z.probs() == zb);
  }
  SUBCASE("a stationary uniform stream converges to uniform") {
    MarginalDensityModel d(5, 0.99);
    Vector start = Vector::Constant(5, 0.01);
    start(0) = 0.96;
    d.set_probs(start);
    Rng rng(4);
    for (int u = 0; u < 1000; ++u) {
      std::vector<MarginalDensityModel::WeightedFeature> batch;
      for (int i = 0; i < 100; ++i) batch.push_back({uniform_index(5, rng), 1.0});
      d.update(batch);
    }
    CHECK(0.5 * (d.probs().array() - 0.2).abs().sum() < 0.02);
  }
}

TEST_CASE("total reward mixing") {
  RewardConfig cfg = uniform_cfg(2);
  cfg.lambda_r = 1.0;
  cfg.lambda = 0.5;
  CHECK(total_reward(cfg, 1.0, -2.0) == doctest::Approx(0.0));
  cfg.lambda = 0.0;
  CHECK(total_reward(cfg, 0.7, -5.0) == doctest::Approx(0.7));
  cfg.lambda = 1.0;
  cfg.lambda_r = 0.0;
  CHECK(total_reward(cfg, 3.0, -0.25) == doctest::Approx(-0.25));
}
