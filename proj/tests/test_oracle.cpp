#include <doctest.h>

#include "vismax/gridworld.hpp"
#include "vismax/random_mdp.hpp"
#include "vismax/verify.hpp"
#include "vismax/visitation_oracle.hpp"

using namespace vismax;

namespace {

TabularMdp single(double gamma) {
  return TabularMdp(Table::Ones(1, 1), Vector::Ones(1), Table::Zero(1, 1), gamma);
}

TabularMdp two_cycle(double gamma) {
  Table p(2, 2);
  p << 0, 1, 1, 0;
  Vector p0(2);
  p0 << 1, 0;
  return TabularMdp(p, p0, Table::Zero(2, 1), gamma);
}

// Truncated series (1 - g) sum_{k>=1} g^(k-1) M^k as an independent oracle.
Table series_visitation(const Table& m, double g) {
  Table acc = Table::Zero(m.rows(), m.cols());
  Table power = m;
  double w = 1.0 - g;
  for (int k = 0; k < 4000 && w > 1e-18; ++k) {
    acc += w * power;
    power = (power * m).eval();
    w *= g;
  }
  return acc;
}

}  // namespace

TEST_CASE("successor matrix") {
  Policy pi = uniform_policy(2, 1);
  Table m = successor_matrix(two_cycle(0.5), pi);
  Table expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK(m.isApprox(expect));
  CHECK(successor_matrix(single(0.5), uniform_policy(1, 1))(0, 0) == 1.0);

  Rng rng(4);
  auto inst = random_instance({}, rng);
  Table dense = successor_matrix(inst.mdp, inst.policy);
  Table sparse = Table(successor_operator(inst.mdp, inst.policy));
  CHECK((dense - sparse).cwiseAbs().maxCoeff() < 1e-15);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) CHECK(dense.row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("conditional visitation matches the power series") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance({}, rng);
    Table m = successor_matrix(inst.mdp, inst.policy);
    Table expect = series_visitation(m, inst.mdp.gamma());
    CHECK(sup_row_l1(conditional_visitation(inst.mdp, inst.policy).probs(), expect) < 1e-8);
    CHECK(sup_row_l1(conditional_visitation_direct(inst.mdp, inst.policy).probs(), expect) < 1e-10);
  }
}

TEST_CASE("single state-action visitation is [1]") {
  auto mdp = single(0.7);
  auto d = conditional_visitation(mdp, uniform_policy(1, 1));
  CHECK(d.probs()(0, 0) == doctest::Approx(1.0));
  CHECK(marginal_visitation(mdp, uniform_policy(1, 1))(0) == doctest::Approx(1.0));
}

TEST_CASE("single state-action feature visitation equals h") {
  Table h(1, 3);
  h << 0.2, 0.5, 0.3;
  auto q = feature_visitation(single(0.8), uniform_policy(1, 1), FeatureMap(h));
  CHECK(sup_row_l1(q.probs(), h) < 1e-9);
  auto qd = feature_visitation_direct(single(0.8), uniform_policy(1, 1), FeatureMap(h));
  CHECK(sup_row_l1(qd.probs(), h) < 1e-12);
}

TEST_CASE("marginal visitation on a 2-cycle with gamma 0.5") {
  Vector d = marginal_visitation(two_cycle(0.5), uniform_policy(2, 1));
  CHECK(d(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("identity features reduce to state-action visitation") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance({}, rng);
    auto fmap = FeatureMap::identity(inst.mdp.n_pairs());
    auto sa = conditional_visitation_direct(inst.mdp, inst.policy);
    CHECK(sup_row_l1(feature_visitation_direct(inst.mdp, inst.policy, fmap).probs(), sa.probs()) < 1e-10);
  }
}

TEST_CASE("iterative and direct feature visitation agree and are fixed points") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance({}, rng);
    auto it = feature_visitation(inst.mdp, inst.policy, inst.features);
    auto dir = feature_visitation_direct(inst.mdp, inst.policy, inst.features);
    CHECK(sup_row_l1(it.probs(), dir.probs()) < 1e-8);
    auto moved = apply_operator_P(inst.mdp, inst.policy, inst.features, dir);
    CHECK(sup_row_l1(moved.probs(), dir.probs()) < 1e-8);
    CHECK(sup_row_l1(feature_visitation_from(conditional_visitation_direct(inst.mdp, inst.policy), inst.features).probs(),
                     dir.probs()) < 1e-10);
  }
}

TEST_CASE("operator P") {
  Rng rng(14);
  auto inst = random_instance({}, rng);
  const std::size_t rows = inst.mdp.n_pairs(), k = inst.features.n_features();

  SUBCASE("row-stochastic in, row-stochastic out") {
    auto out = apply_operator_P(inst.mdp, inst.policy, inst.features, random_conditional_table(rows, k, rng));
    for (Eigen::Index i = 0; i < out.probs().rows(); ++i) CHECK(std::abs(out.probs().row(i).sum() - 1.0) < 1e-12);
  }
  SUBCASE("gamma 0 ignores q") {
    auto mdp0 = inst.mdp.with_gamma(0.0);
    auto a = apply_operator_P(mdp0, inst.policy, inst.features, random_conditional_table(rows, k, rng));
    auto b = apply_operator_P(mdp0, inst.policy, inst.features, random_conditional_table(rows, k, rng));
    CHECK(sup_row_l1(a.probs(), b.probs()) < 1e-15);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS(apply_operator_P(inst.mdp, inst.policy, inst.features, random_conditional_table(rows + 1, k, rng)));
  }
}

TEST_CASE("contraction in both generalized norms") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance({}, rng);
    for (int n : {1, 2}) CHECK(verify_contraction(inst.mdp, inst.policy, inst.features, n, 10, rng).holds());
  }
  auto inst = random_instance({}, rng);
  auto p = random_conditional_table(inst.mdp.n_pairs(), inst.features.n_features(), rng);
  CHECK(lbar_norm(p.probs() - p.probs(), 1) == 0.0);
  auto rep = verify_contraction(inst.mdp.with_gamma(0.0), inst.policy, inst.features, 2, 10, rng);
  CHECK(rep.max_ratio < 1e-12);
}

TEST_CASE("inverse-gamma fault breaks contraction") {
  Rng rng(16);
  bool broke = false;
  for (int trial = 0; trial < 20 && !broke; ++trial) {
    auto inst = random_instance({}, rng);
    broke = !verify_contraction(inst.mdp, inst.policy, inst.features, 1, 10, rng, OperatorFault::InverseGamma).holds();
  }
  CHECK(broke);
}

TEST_CASE("norm and KL helpers") {
  Table f(2, 2);
  f << 3, -4, 1, 1;
  CHECK(lbar_norm(f, 1) == doctest::Approx(7.0));
  CHECK(lbar_norm(f, 2) == doctest::Approx(5.0));
  Vector p(3), q(3);
  p << 0.5, 0.5, 0.0;
  q << 0.25, 0.25, 0.5;
  CHECK(kl_divergence(p, q) == doctest::Approx(std::log(2.0)));
  Vector zero_q(3);
  zero_q << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(kl_divergence(p, zero_q), std::domain_error);
}

TEST_CASE("factorization through the policy") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance({}, rng);
    const auto& mdp = inst.mdp;
    Table d = conditional_visitation_direct(mdp, inst.policy).probs();
    const std::size_t A = mdp.n_actions();
    for (Eigen::Index row = 0; row < d.rows(); ++row)
      for (std::size_t sb = 0; sb < mdp.n_states(); ++sb) {
        double ds = 0.0;
        for (std::size_t ab = 0; ab < A; ++ab) ds += d(row, static_cast<Eigen::Index>(sb * A + ab));
        for (std::size_t ab = 0; ab < A; ++ab)
          CHECK(std::abs(d(row, static_cast<Eigen::Index>(sb * A + ab)) - inst.policy(sb, ab) * ds) < 1e-10);
      }
  }
}

TEST_CASE("lower bound") {
  SUBCASE("holds on random instances") {
    Rng rng(18);
    for (int trial = 0; trial < 30; ++trial) {
      RandomMdpOptions opts;
      opts.max_states = 5;
      opts.max_actions = 2;
      auto mdp = random_mdp(opts, rng).with_gamma(trial % 2 ? 0.9 : 0.5);
      auto pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
      auto rep = verify_lower_bound(mdp, pi, RelativeMeasure::uniform(mdp.n_pairs()));
      CHECK(rep.lhs <= rep.rhs + 1e-9);
      CHECK(rep.holds);
    }
  }
  SUBCASE("equality for one state-action pair") {
    RelativeMeasure q{Vector::Constant(1, 0.4)};
    auto rep = verify_lower_bound(single(0.6), uniform_policy(1, 1), q);
    CHECK(rep.slack == doctest::Approx(0.0));
    CHECK(rep.lhs == doctest::Approx(std::log(0.4)).epsilon(1e-12));
    CHECK(std::abs(rep.lhs - rep.rhs) < 1e-9);
  }
  SUBCASE("zero when every row equals q*") {
    // Two states that jump uniformly: every conditional row equals the uniform measure.
    Table p = Table::Constant(4, 2, 0.5);
    Vector p0 = Vector::Constant(2, 0.5);
    TabularMdp mdp(p, p0, Table::Zero(2, 2), 0.7);
    auto rep = verify_lower_bound(mdp, uniform_policy(2, 2), RelativeMeasure::uniform(4));
    CHECK(std::abs(rep.lhs) < 1e-12);
    CHECK(rep.holds);
  }
}

TEST_CASE("conditional rows approach the marginal as gamma grows") {
  Rng rng(19);
  auto inst = random_instance({}, rng);
  double prev = 1e9;
  for (double g : {0.9, 0.99, 0.999}) {
    auto mdp = inst.mdp.with_gamma(g);
    Table d = conditional_visitation_direct(mdp, inst.policy).probs();
    Vector m = marginal_visitation(mdp, inst.policy);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) worst = std::max(worst, 0.5 * (d.row(i).transpose() - m).cwiseAbs().sum());
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("verification battery passes and detects the fault") {
  VerifyOptions opts;
  opts.trials = 20;
  auto rep = run_verification(opts);
  CHECK(rep.passed());
  CHECK(rep.checks.size() == 7);
  opts.fault = OperatorFault::InverseGamma;
  CHECK_FALSE(run_verification(opts).passed());
}
