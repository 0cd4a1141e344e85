#include <doctest.h>

#include "vismax/config.hpp"
#include "vismax/metrics.hpp"
#include "vismax/run_csv.hpp"
#include "vismax/trainer.hpp"

#include <sstream>

using namespace vismax;

namespace {

std::string csv_of(const std::vector<MetricRecord>& recs) {
  std::ostringstream os;
  write_run_csv(os, recs);
  return os.str();
}

// Greedy policy of the logits, ties to the lowest index.
Policy greedy(const SoftmaxPolicy& pi) {
  Policy g = Policy::Zero(pi.logits().rows(), pi.logits().cols());
  for (Eigen::Index s = 0; s < g.rows(); ++s) {
    Eigen::Index best = 0;
    pi.logits().row(s).maxCoeff(&best);
    g(s, best) = 1.0;
  }
  return g;
}

}  // namespace

TEST_CASE("iteration 0 only emits the baseline row") {
  auto cfg = parse_config("iterations = 0\nlayout = empty-room\n");
  auto recs = train(cfg, Strategy::CV, 0);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].iteration == 0);
  CHECK(recs[0].env_steps == 0);
  CHECK(recs[0].layout == "empty-room");
  CHECK(recs[0].strategy == "CV");
}

TEST_CASE("evaluation grid") {
  auto cfg = parse_config("iterations = 25\neval_interval = 10\nlayout = empty-room\nsac.batch_size = 32\n");
  auto recs = train(cfg, Strategy::SAC, 1);
  std::vector<std::size_t> its;
  for (const auto& r : recs) its.push_back(r.iteration);
  CHECK(its == std::vector<std::size_t>{0, 10, 20, 25});
  CHECK(recs.back().env_steps == 25 * cfg.sac.env_steps_per_iter);
}

TEST_CASE("identical seeds give identical streams") {
  const std::string text =
      "iterations = 30\neval_interval = 10\nlayout = two-rooms\nsac.batch_size = 64\n"
      "visitation.batch_size = 64\nmetrics.estimator = mc\nmetrics.mc_episodes = 20\n";
  auto cfg = parse_config(text);
  for (auto s : {Strategy::SAC, Strategy::MV, Strategy::CV}) {
    CAPTURE(to_string(s));
    const auto a = csv_of(train(cfg, s, 7));
    const auto b = csv_of(train(cfg, s, 7));
    CHECK(a == b);
    CHECK(a != csv_of(train(cfg, s, 8)));
  }
}

TEST_CASE("trainer internals stay consistent") {
  auto cfg = parse_config("iterations = 20\nlayout = empty-room\nsac.batch_size = 64\nvisitation.batch_size = 64\n"
                          "sac.buffer_capacity = 1000\n");
  Trainer t(cfg, Strategy::CV, 3);
  for (int i = 0; i < 20; ++i) t.iterate();
  CHECK(t.iteration() == 20);
  CHECK(t.buffer().size() <= 1000);
  CHECK(t.env_steps() == 20 * cfg.sac.env_steps_per_iter);
  for (Eigen::Index s = 0; s < t.policy().logits().rows(); ++s)
    CHECK(t.policy().probs(static_cast<std::size_t>(s)).sum() == doctest::Approx(1.0));
  CHECK(t.visitation_model().target_logits() != t.visitation_model().logits());
  std::ostringstream ckpt;
  t.save_checkpoint(ckpt);
  CHECK(ckpt.str().find("policy_logits") != std::string::npos);
}

TEST_CASE("pure control reaches the goal") {
  auto cfg = parse_config(
      "layout = empty-room\nmode = control\nreward.lambda = 0\nreward.lambda_r = 1\nsac.gamma = 0.95\n"
      "iterations = 200\nsac.critic_lr = 0.1\nsac.actor_lr = 0.03\nsac.polyak_tau = 0.1\n"
      "sac.critic_updates_per_iter = 4\nsac.actor_centering = state\n");
  Trainer t(cfg, Strategy::SAC, 0);
  for (int i = 0; i < 200; ++i) t.iterate();
  const auto& mdp = t.world().mdp;
  const double ret = exact_expected_return(mdp, greedy(t.policy()));
  CHECK(ret > 0.0);
  CHECK(ret <= value_iteration(mdp).expected_return + 1e-9);
}

TEST_CASE("exploration with the conditional bonus widens coverage of a single room") {
  auto cfg = parse_config(
      "layout = empty-room\nmode = explore\nsac.gamma = 0.99\nsac.lambda_sac = 0.2\nsac.critic_lr = 0.1\n"
      "sac.actor_lr = 0.001\nsac.polyak_tau = 0.1\nsac.critic_updates_per_iter = 4\nsac.actor_centering = state\n"
      "sac.critic_init = 27.45\nsac.horizon = 300\niterations = 1000\neval_interval = 1000\n");
  auto recs = train(cfg, Strategy::CV, 0);
  REQUIRE(recs.size() == 2);
  CHECK(recs.back().conditional_entropy > recs.front().conditional_entropy);
}
