#include <doctest.h>

#include "vismax/gridworld.hpp"
#include "vismax/metrics.hpp"

using namespace vismax;

namespace {

// Deterministic policy that always takes `a`.
Policy constant_policy(std::size_t n_states, std::size_t a) {
  Policy p = Policy::Zero(static_cast<Eigen::Index>(n_states), kGridActions);
  p.col(static_cast<Eigen::Index>(a)).setOnes();
  return p;
}

// Deterministic policy with a pseudo-random action per state.
Policy hashed_policy(std::size_t n_states, std::uint64_t salt) {
  Policy p = Policy::Zero(static_cast<Eigen::Index>(n_states), kGridActions);
  for (std::size_t s = 0; s < n_states; ++s) p(static_cast<Eigen::Index>(s), ((s * 2654435761u) ^ salt) % kGridActions) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("uniform occupancy scores zero on the marginal metric") {
  // Two states that jump uniformly; features are the states.
  Table p = Table::Constant(4, 2, 0.5);
  Vector p0 = Vector::Constant(2, 0.5);
  TabularMdp mdp(p, p0, Table::Zero(2, 2), 0.8);
  Table h(4, 2);
  h << 1, 0, 1, 0, 0, 1, 0, 1;
  FeatureMap fmap(h);
  auto pi = uniform_policy(2, 2);
  auto q = RelativeMeasure::uniform(2);
  CHECK(std::abs(marginal_feature_entropy(mdp, pi, fmap, q)) < 1e-12);
  // From a given s0 the t = 0 visit adds (1 - gamma) on top of gamma * uniform.
  Vector d0(2);
  d0 << 0.2 + 0.8 * 0.5, 0.8 * 0.5;
  const double expect = -kl_divergence(d0, q.probs);
  CHECK(conditional_feature_entropy(mdp, pi, fmap, q) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(-0.0201355).epsilon(1e-5));
}

TEST_CASE("a policy pinned to its start cell scores -log K") {
  auto w = build_gridworld(parse_grid_map("S../...", "pin"), 0.9);
  auto pi = constant_policy(w.mdp.n_states(), kStay);
  auto q = RelativeMeasure::uniform(w.n_features());
  CHECK(marginal_feature_entropy(w.mdp, pi, w.features, q) == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
  CHECK(conditional_feature_entropy(w.mdp, pi, w.features, q) == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
  // With a random start every start cell is still a point mass.
  auto wr = build_gridworld(parse_grid_map(".#./...", "pin-random"), 0.9);
  auto pr = constant_policy(wr.mdp.n_states(), kStay);
  auto qr = RelativeMeasure::uniform(wr.n_features());
  CHECK(conditional_feature_entropy(wr.mdp, pr, wr.features, qr) == doctest::Approx(-std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("a single deterministic start makes the two entropies coincide") {
  auto w = build_gridworld(make_layout("two-rooms"), 0.95);
  auto q = RelativeMeasure::uniform(w.n_features());
  for (std::uint64_t salt : {0u, 7u, 99u}) {
    auto pi = hashed_policy(w.mdp.n_states(), salt);
    CHECK(std::abs(marginal_feature_entropy(w.mdp, pi, w.features, q) -
                   conditional_feature_entropy(w.mdp, pi, w.features, q)) < 1e-10);
  }
  auto pu = uniform_policy(w.mdp.n_states(), kGridActions);
  CHECK(std::abs(marginal_feature_entropy(w.mdp, pu, w.features, q) -
                 conditional_feature_entropy(w.mdp, pu, w.features, q)) < 1e-10);
}

TEST_CASE("mixing over random starts cannot reduce marginal coverage") {
  auto w = build_gridworld(make_layout("empty-room-random"), 0.95);
  auto q = RelativeMeasure::uniform(w.n_features());
  auto pi = uniform_policy(w.mdp.n_states(), kGridActions);
  const double marginal = marginal_feature_entropy(w.mdp, pi, w.features, q);
  const double conditional = conditional_feature_entropy(w.mdp, pi, w.features, q);
  CHECK(marginal >= conditional);
  CHECK(marginal <= 0.0);
  CHECK(conditional <= 0.0);
}

TEST_CASE("feature occupancy is a distribution") {
  auto w = build_gridworld(make_layout("four-rooms"), 0.9);
  Vector d = feature_occupancy(w.mdp, uniform_policy(w.mdp.n_states(), kGridActions), w.features);
  CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.minCoeff() >= 0.0);
}

TEST_CASE("Monte Carlo entropies") {
  SUBCASE("deterministic everything gives identical episodes") {
    auto w = build_gridworld(make_layout("empty-room"), 0.9);
    auto pi = hashed_policy(w.mdp.n_states(), 3);
    auto q = RelativeMeasure::uniform(w.n_features());
    Rng rng(1);
    auto est = mc_entropy_estimates(w.mdp, pi, w.features, q, 2, 200, rng);
    CHECK(est.conditional_halfwidth == 0.0);
    CHECK(est.marginal == doctest::Approx(est.conditional));
  }
  SUBCASE("a long horizon matches the exact value on 3x3") {
    auto w = build_gridworld(parse_grid_map("S../.../...", "three"), 0.9);
    auto pi = hashed_policy(w.mdp.n_states(), 11);
    auto q = RelativeMeasure::uniform(w.n_features());
    Rng rng(2);
    auto est = mc_entropy_estimates(w.mdp, pi, w.features, q, 2, 140, rng);
    CHECK(std::abs(est.marginal - marginal_feature_entropy(w.mdp, pi, w.features, q)) < 1e-5);
  }
  SUBCASE("errors shrink with more episodes under random starts") {
    auto w = build_gridworld(make_layout("empty-room-random"), 0.9);
    auto q = RelativeMeasure::uniform(w.n_features());
    double err_small = 0.0, err_large = 0.0;
    for (std::uint64_t salt = 0; salt < 4; ++salt) {
      auto pi = hashed_policy(w.mdp.n_states(), salt);
      const double exact_m = marginal_feature_entropy(w.mdp, pi, w.features, q);
      const double exact_c = conditional_feature_entropy(w.mdp, pi, w.features, q);
      Rng a(10 + salt), b(20 + salt);
      auto small = mc_entropy_estimates(w.mdp, pi, w.features, q, 100, 150, a, 0);
      auto large = mc_entropy_estimates(w.mdp, pi, w.features, q, 10000, 150, b, 0);
      err_small += std::abs(small.marginal - exact_m) + std::abs(small.conditional - exact_c);
      err_large += std::abs(large.marginal - exact_m) + std::abs(large.conditional - exact_c);
    }
    CHECK(err_large < err_small);
  }
}

TEST_CASE("expected return") {
  SUBCASE("zero reward") {
    auto w = build_gridworld(make_layout("empty-room"), 0.95);
    auto pi = uniform_policy(w.mdp.n_states(), kGridActions);
    Rng rng(3);
    CHECK(expected_return(w.mdp, pi, 10, 100, rng) == 0.0);
    CHECK(exact_expected_return(w.mdp, pi) == 0.0);
  }
  SUBCASE("goal reached at t = 3") {
    auto w = build_gridworld(parse_grid_map("S..G", "line"), 0.95);
    auto pi = constant_policy(w.mdp.n_states(), kForward);
    const double g = 0.95;
    Rng rng(4);
    const std::size_t horizon = 50;
    double truncated = 0.0;
    for (std::size_t t = 3; t < horizon; ++t) truncated += std::pow(g, static_cast<double>(t));
    CHECK(expected_return(w.mdp, pi, 3, horizon, rng) == doctest::Approx(truncated).epsilon(1e-12));
    CHECK(exact_expected_return(w.mdp, pi) == doctest::Approx(std::pow(g, 3) / (1 - g)).epsilon(1e-10));
    auto opt = value_iteration(w.mdp);
    CHECK(opt.expected_return == doctest::Approx(std::pow(g, 3) / (1 - g)).epsilon(1e-9));
    CHECK(exact_expected_return(w.mdp, opt.policy) == doctest::Approx(opt.expected_return).epsilon(1e-9));
  }
  SUBCASE("Monte Carlo within three standard errors of policy evaluation") {
    auto w = build_gridworld(make_layout("empty-room", {.with_goal = true}), 0.9);
    auto pi = uniform_policy(w.mdp.n_states(), kGridActions);
    Rng rng(5);
    auto est = expected_return_estimate(w.mdp, pi, 4000, 300, rng);
    CHECK(std::abs(est.mean - exact_expected_return(w.mdp, pi)) < 3 * est.standard_error);
  }
  SUBCASE("value iteration dominates the uniform policy") {
    auto w = build_gridworld(make_layout("two-rooms", {.with_goal = true}), 0.95);
    auto opt = value_iteration(w.mdp);
    CHECK(opt.expected_return > exact_expected_return(w.mdp, uniform_policy(w.mdp.n_states(), kGridActions)));
    Vector v = policy_evaluation(w.mdp, opt.policy);
    CHECK((v - opt.value).cwiseAbs().maxCoeff() < 1e-8);
  }
}
