#include "vismax/metrics.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vismax {

namespace {

constexpr double kFloor = 1e-12;
constexpr double kZ95 = 1.959963984540054;

/// Hs[s][z] = sum_a pi(a|s) h(z|s,a).
Table state_feature_table(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap) {
  if (fmap.n_pairs() != mdp.n_pairs()) throw std::invalid_argument("feature map does not match the MDP");
  Table hs = Table::Zero(static_cast<Eigen::Index>(mdp.n_states()), static_cast<Eigen::Index>(fmap.n_features()));
  for (std::size_t s = 0; s < mdp.n_states(); ++s)
    for (std::size_t a = 0; a < mdp.n_actions(); ++a)
      hs.row(static_cast<Eigen::Index>(s)) +=
          policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) *
          fmap.h().row(static_cast<Eigen::Index>(mdp.pair(s, a)));
  return hs;
}

Eigen::SparseMatrix<double> discounted_system(const TabularMdp& mdp, const Policy& policy, bool transpose) {
  const Table p = state_transition_matrix(mdp, policy);
  Eigen::SparseMatrix<double> ps = Eigen::SparseMatrix<double>(p.sparseView());
  if (transpose) ps = Eigen::SparseMatrix<double>(ps.transpose());
  Eigen::SparseMatrix<double> lhs(ps.rows(), ps.cols());
  lhs.setIdentity();
  lhs -= mdp.gamma() * ps;
  lhs.makeCompressed();
  return lhs;
}

double neg_kl_floored(const Vector& p, const Vector& qstar) {
  return -kl_divergence(p, qstar.cwiseMax(kFloor));
}

}  // namespace

Vector feature_occupancy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap) {
  const Vector ds = marginal_state_visitation(mdp, policy);
  return (ds.transpose() * state_feature_table(mdp, policy, fmap)).transpose();
}

double marginal_feature_entropy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                const RelativeMeasure& qstar) {
  if (qstar.size() != fmap.n_features()) throw std::invalid_argument("q* size differs from the feature count");
  return -kl_divergence(feature_occupancy(mdp, policy, fmap), qstar.probs);
}

double conditional_feature_entropy(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                   const RelativeMeasure& qstar) {
  if (qstar.size() != fmap.n_features()) throw std::invalid_argument("q* size differs from the feature count");
  const Table hs = state_feature_table(mdp, policy, fmap);

  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s < mdp.p0().size(); ++s)
    if (mdp.p0()(s) > 0.0) starts.push_back(s);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(mdp.p0().size(), static_cast<Eigen::Index>(starts.size()));
  for (std::size_t j = 0; j < starts.size(); ++j) rhs(starts[j], static_cast<Eigen::Index>(j)) = 1.0 - mdp.gamma();

  // Column j of the solution is the discounted state occupancy started at starts[j].
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(discounted_system(mdp, policy, true));
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  const Eigen::MatrixXd occ = lu.solve(rhs);

  double total = 0.0;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    const Vector dz = (occ.col(static_cast<Eigen::Index>(j)).transpose() * hs).transpose();
    total += mdp.p0()(starts[j]) * kl_divergence(dz, qstar.probs);
  }
  return -total;
}

McEntropyEstimate mc_entropy_estimates(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                       const RelativeMeasure& qstar, std::size_t episodes, std::size_t horizon,
                                       Rng& rng, std::size_t bootstrap_resamples) {
  if (episodes < 2) throw std::invalid_argument("Monte Carlo entropy needs at least two episodes");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (qstar.size() != fmap.n_features()) throw std::invalid_argument("q* size differs from the feature count");

  const double gamma = mdp.gamma();
  std::vector<double> weights(horizon);
  double wsum = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    weights[t] = (1.0 - gamma) * std::pow(gamma, static_cast<double>(t));
    wsum += weights[t];
  }
  for (auto& w : weights) w /= wsum;

  const auto k = static_cast<Eigen::Index>(fmap.n_features());
  Table hists = Table::Zero(static_cast<Eigen::Index>(episodes), k);
  std::vector<double> per_episode(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    const Trajectory traj = sample_episode(mdp, policy, horizon, rng);
    auto row = hists.row(static_cast<Eigen::Index>(e));
    for (std::size_t t = 0; t < horizon; ++t)
      row += weights[t] * fmap.h().row(static_cast<Eigen::Index>(mdp.pair(traj.states[t], traj.actions[t])));
    per_episode[e] = neg_kl_floored(row.transpose(), qstar.probs);
  }

  McEntropyEstimate out;
  double mean = 0.0;
  for (double v : per_episode) mean += v;
  mean /= static_cast<double>(episodes);
  double var = 0.0;
  for (double v : per_episode) var += (v - mean) * (v - mean);
  var /= static_cast<double>(episodes - 1);
  out.conditional = mean;
  out.conditional_halfwidth = kZ95 * std::sqrt(var / static_cast<double>(episodes));

  const Vector pooled = hists.colwise().mean().transpose();
  out.marginal = neg_kl_floored(pooled, qstar.probs);

  if (bootstrap_resamples > 0) {
    std::vector<double> boot(bootstrap_resamples);
    Vector acc(k);
    for (auto& b : boot) {
      acc.setZero();
      for (std::size_t i = 0; i < episodes; ++i)
        acc += hists.row(static_cast<Eigen::Index>(uniform_index(episodes, rng))).transpose();
      acc /= static_cast<double>(episodes);
      b = neg_kl_floored(acc, qstar.probs);
    }
    std::sort(boot.begin(), boot.end());
    const auto pick = [&](double q) {
      const double pos = q * static_cast<double>(boot.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, boot.size() - 1);
      return boot[lo] + (pos - static_cast<double>(lo)) * (boot[hi] - boot[lo]);
    };
    out.marginal_halfwidth = 0.5 * (pick(0.975) - pick(0.025));
  }
  return out;
}

ReturnEstimate expected_return_estimate(const TabularMdp& mdp, const Policy& policy, std::size_t episodes,
                                        std::size_t horizon, Rng& rng) {
  if (episodes == 0) throw std::invalid_argument("expected return needs at least one episode");
  std::vector<double> returns(episodes);
  for (auto& ret : returns) {
    const Trajectory traj = sample_episode(mdp, policy, horizon, rng);
    double g = 0.0, disc = 1.0;
    for (double r : traj.rewards) {
      g += disc * r;
      disc *= mdp.gamma();
    }
    ret = g;
  }
  ReturnEstimate out;
  for (double r : returns) out.mean += r;
  out.mean /= static_cast<double>(episodes);
  if (episodes > 1) {
    double var = 0.0;
    for (double r : returns) var += (r - out.mean) * (r - out.mean);
    var /= static_cast<double>(episodes - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(episodes));
  }
  return out;
}

double expected_return(const TabularMdp& mdp, const Policy& policy, std::size_t episodes, std::size_t horizon,
                       Rng& rng) {
  return expected_return_estimate(mdp, policy, episodes, horizon, rng).mean;
}

Vector policy_evaluation(const TabularMdp& mdp, const Policy& policy) {
  Vector r_pi = Vector::Zero(static_cast<Eigen::Index>(mdp.n_states()));
  for (Eigen::Index s = 0; s < r_pi.size(); ++s) r_pi(s) = policy.row(s).dot(mdp.reward().row(s));
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(discounted_system(mdp, policy, false));
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  return lu.solve(r_pi);
}

double exact_expected_return(const TabularMdp& mdp, const Policy& policy) {
  return mdp.p0().dot(policy_evaluation(mdp, policy));
}

OptimalSolution value_iteration(const TabularMdp& mdp, double tol) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  const auto na = static_cast<Eigen::Index>(mdp.n_actions());
  Vector v = Vector::Zero(n);
  Policy greedy = Policy::Zero(n, na);
  const std::size_t budget = contraction_iteration_budget(mdp.gamma(), tol) + 1000;
  for (std::size_t it = 0;; ++it) {
    if (it >= budget) throw ConvergenceError("value iteration did not converge");
    Vector next(n);
    for (Eigen::Index s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < na; ++a) {
        double q = mdp.reward()(s, a);
        for (const auto& succ : mdp.successors(static_cast<std::size_t>(s), static_cast<std::size_t>(a)))
          q += mdp.gamma() * succ.probability * v(static_cast<Eigen::Index>(succ.state));
        best = std::max(best, q);
      }
      next(s) = best;
    }
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (delta < tol) break;
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    Eigen::Index best_a = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < na; ++a) {
      double q = mdp.reward()(s, a);
      for (const auto& succ : mdp.successors(static_cast<std::size_t>(s), static_cast<std::size_t>(a)))
        q += mdp.gamma() * succ.probability * v(static_cast<Eigen::Index>(succ.state));
      if (q > best + 1e-12) {
        best = q;
        best_a = a;
      }
    }
    greedy(s, best_a) = 1.0;
  }
  return {v, greedy, mdp.p0().dot(v)};
}

}  // namespace vismax
