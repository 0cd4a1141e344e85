#include "vismax/visitation_oracle.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace vismax {

namespace {

constexpr std::size_t kDirectSolveLimit = 4096;

Eigen::SparseMatrix<double> identity_minus(const SparseTable& m, double gamma) {
  Eigen::SparseMatrix<double> lhs(m.rows(), m.cols());
  lhs.setIdentity();
  lhs -= gamma * Eigen::SparseMatrix<double>(m);
  lhs.makeCompressed();
  return lhs;
}

}  // namespace

void ConditionalDistTable::validate(double tol) const {
  for (Eigen::Index i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < probs_.cols(); ++j) {
      if (probs_(i, j) < -tol || std::isnan(probs_(i, j)))
        throw std::invalid_argument("conditional table has a negative entry in row " + std::to_string(i));
      sum += probs_(i, j);
    }
    if (std::abs(sum - 1.0) > tol)
      throw std::invalid_argument("conditional table row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

ConditionalDistTable ConditionalDistTable::uniform(std::size_t n_rows, std::size_t n_targets) {
  return ConditionalDistTable(Table::Constant(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_targets),
                                              1.0 / static_cast<double>(n_targets)));
}

RelativeMeasure RelativeMeasure::uniform(std::size_t n) {
  return {Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n))};
}

void RelativeMeasure::validate() const {
  if (probs.size() == 0) throw std::invalid_argument("relative measure is empty");
  if ((probs.array() < 0.0).any()) throw std::invalid_argument("relative measure has a negative entry");
  if (std::abs(probs.sum() - 1.0) > 1e-12) throw std::invalid_argument("relative measure does not sum to 1");
}

double sup_row_l1(const Table& a, const Table& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("table shape mismatch");
  if (a.rows() == 0) return 0.0;
  return (a - b).cwiseAbs().rowwise().sum().maxCoeff();
}

double lbar_norm(const Table& f, int n) {
  if (n < 1) throw std::invalid_argument("norm order must be positive");
  if (f.rows() == 0) return 0.0;
  const double sup = f.cwiseAbs().array().pow(static_cast<double>(n)).rowwise().sum().maxCoeff();
  return std::pow(sup, 1.0 / static_cast<double>(n));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL arguments differ in size");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw std::domain_error("KL undefined: reference is zero where the first argument is positive");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double kl_divergence(const Vector& p, const Vector& q) {
  return kl_divergence(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                       std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

SparseTable successor_operator(const TabularMdp& mdp, const Policy& policy) {
  validate_policy(mdp, policy);
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const auto row = static_cast<int>(mdp.pair(s, a));
      for (const auto& succ : mdp.successors(s, a)) {
        for (std::size_t a2 = 0; a2 < mdp.n_actions(); ++a2) {
          const double pi = policy(static_cast<Eigen::Index>(succ.state), static_cast<Eigen::Index>(a2));
          if (pi > 0.0) entries.emplace_back(row, static_cast<int>(mdp.pair(succ.state, a2)), succ.probability * pi);
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mdp.n_pairs());
  SparseTable m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Table successor_matrix(const TabularMdp& mdp, const Policy& policy) {
  return Table(successor_operator(mdp, policy));
}

Table state_transition_matrix(const TabularMdp& mdp, const Policy& policy) {
  validate_policy(mdp, policy);
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Table p = Table::Zero(n, n);
  for (std::size_t s = 0; s < mdp.n_states(); ++s)
    for (std::size_t a = 0; a < mdp.n_actions(); ++a)
      for (const auto& succ : mdp.successors(s, a))
        p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(succ.state)) +=
            policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * succ.probability;
  return p;
}

std::size_t contraction_iteration_budget(double gamma, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (gamma <= 0.0) return 64;
  return static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(gamma))) + 64;
}

namespace {

/// Iterates x <- base + gamma * M x from `x` until the sup row L1 step is below tol.
Table iterate_fixed_point(const SparseTable& m, const Table& base, Table x, double gamma, double tol) {
  const std::size_t budget = contraction_iteration_budget(gamma, tol);
  for (std::size_t it = 0; it < budget; ++it) {
    Table next = base + gamma * (m * x);
    const double delta = sup_row_l1(next, x);
    x = std::move(next);
    if (delta < tol) return x;
  }
  throw ConvergenceError("fixed-point iteration did not converge within " + std::to_string(budget) + " iterations");
}

}  // namespace

ConditionalDistTable conditional_visitation(const TabularMdp& mdp, const Policy& policy, double tol) {
  const SparseTable m = successor_operator(mdp, policy);
  const double gamma = mdp.gamma();
  const Table base = (1.0 - gamma) * Table(m);
  const auto n = mdp.n_pairs();
  return ConditionalDistTable(
      iterate_fixed_point(m, base, ConditionalDistTable::uniform(n, n).probs(), gamma, tol));
}

ConditionalDistTable conditional_visitation_direct(const TabularMdp& mdp, const Policy& policy) {
  if (mdp.n_pairs() > kDirectSolveLimit) throw std::invalid_argument("direct solve limited to 4096 state-action pairs");
  const Table m = successor_matrix(mdp, policy);
  const double gamma = mdp.gamma();
  const auto n = m.rows();
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - gamma * Eigen::MatrixXd(m);
  const Eigen::MatrixXd rhs = (1.0 - gamma) * Eigen::MatrixXd(m);
  return ConditionalDistTable(Table(lhs.partialPivLu().solve(rhs)));
}

ConditionalDistTable feature_visitation(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                        double tol) {
  if (fmap.n_pairs() != mdp.n_pairs()) throw std::invalid_argument("feature map does not match the MDP");
  const SparseTable m = successor_operator(mdp, policy);
  const double gamma = mdp.gamma();
  const Table base = (1.0 - gamma) * (m * fmap.h());
  return ConditionalDistTable(iterate_fixed_point(
      m, base, ConditionalDistTable::uniform(mdp.n_pairs(), fmap.n_features()).probs(), gamma, tol));
}

ConditionalDistTable feature_visitation_direct(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap) {
  if (fmap.n_pairs() != mdp.n_pairs()) throw std::invalid_argument("feature map does not match the MDP");
  const SparseTable m = successor_operator(mdp, policy);
  const double gamma = mdp.gamma();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(identity_minus(m, gamma));
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  const Eigen::MatrixXd rhs = (1.0 - gamma) * Eigen::MatrixXd(m * fmap.h());
  const Eigen::MatrixXd sol = lu.solve(rhs);
  return ConditionalDistTable(Table(sol));
}

ConditionalDistTable feature_visitation_from(const ConditionalDistTable& sa_visitation, const FeatureMap& fmap) {
  if (sa_visitation.n_targets() != fmap.n_pairs()) throw std::invalid_argument("feature map does not match table");
  return ConditionalDistTable(Table(sa_visitation.probs() * fmap.h()));
}

Vector marginal_state_visitation(const TabularMdp& mdp, const Policy& policy) {
  const Table p = state_transition_matrix(mdp, policy);
  const double gamma = mdp.gamma();
  const Eigen::SparseMatrix<double> pt = Eigen::SparseMatrix<double>(p.sparseView()).transpose();
  Eigen::SparseMatrix<double> lhs(pt.rows(), pt.cols());
  lhs.setIdentity();
  lhs -= gamma * pt;
  lhs.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  return lu.solve(Vector((1.0 - gamma) * mdp.p0()));
}

Vector marginal_visitation(const TabularMdp& mdp, const Policy& policy) {
  const Vector ds = marginal_state_visitation(mdp, policy);
  Vector d(static_cast<Eigen::Index>(mdp.n_pairs()));
  for (std::size_t s = 0; s < mdp.n_states(); ++s)
    for (std::size_t a = 0; a < mdp.n_actions(); ++a)
      d(static_cast<Eigen::Index>(mdp.pair(s, a))) =
          ds(static_cast<Eigen::Index>(s)) * policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  return d;
}

ConditionalDistTable apply_operator_P(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                      const ConditionalDistTable& q, OperatorFault fault) {
  if (q.n_rows() != mdp.n_pairs() || q.n_targets() != fmap.n_features() || fmap.n_pairs() != mdp.n_pairs())
    throw std::invalid_argument("operator P: table shape does not match the MDP and feature map");
  double gamma = mdp.gamma();
  if (fault == OperatorFault::InverseGamma && gamma > 0.0) gamma = 1.0 / gamma;
  const SparseTable m = successor_operator(mdp, policy);
  return ConditionalDistTable(Table(m * ((1.0 - gamma) * fmap.h() + gamma * q.probs())));
}

ConditionalDistTable random_conditional_table(std::size_t n_rows, std::size_t n_targets, Rng& rng) {
  Table t(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_targets));
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = -std::log(1.0 - uniform01(rng));
    t.row(i) /= t.row(i).sum();
  }
  return ConditionalDistTable(std::move(t));
}

ContractionReport verify_contraction(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                     int norm_order, std::size_t trials, Rng& rng, OperatorFault fault) {
  if (trials == 0) throw std::invalid_argument("at least one contraction trial is required");
  ContractionReport report;
  report.norm_order = norm_order;
  report.trials = trials;
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto p = random_conditional_table(mdp.n_pairs(), fmap.n_features(), rng);
    const auto q = random_conditional_table(mdp.n_pairs(), fmap.n_features(), rng);
    const auto pp = apply_operator_P(mdp, policy, fmap, p, fault);
    const auto pq = apply_operator_P(mdp, policy, fmap, q, fault);
    const double after = lbar_norm(pp.probs() - pq.probs(), norm_order);
    const double before = lbar_norm(p.probs() - q.probs(), norm_order);
    report.max_violation = std::max(report.max_violation, after - mdp.gamma() * before);
    if (before > 0.0) report.max_ratio = std::max(report.max_ratio, after / before);
  }
  return report;
}

LowerBoundReport verify_lower_bound(const TabularMdp& mdp, const Policy& policy, const RelativeMeasure& qstar) {
  if (qstar.size() != mdp.n_pairs()) throw std::invalid_argument("q* must be indexed by state-action pair");
  Vector d = marginal_visitation(mdp, policy);
  d /= d.sum();
  const ConditionalDistTable cond = mdp.n_pairs() <= kDirectSolveLimit ? conditional_visitation_direct(mdp, policy)
                                                                         : conditional_visitation(mdp, policy);
  // Renormalizing removes solver round-off, which the square root in the slack would amplify.
  Table dc = cond.probs();
  for (Eigen::Index i = 0; i < dc.rows(); ++i) dc.row(i) /= dc.row(i).sum();

  LowerBoundReport report;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) <= 0.0) continue;
    const Vector row = dc.row(i).transpose();
    report.lhs -= d(i) * kl_divergence(row, qstar.probs);
  }
  report.kl_marginal = kl_divergence(d, qstar.probs);

  Vector dtilde = (d.transpose() * dc).transpose();
  dtilde /= dtilde.sum();
  // Throws std::domain_error when dtilde misses part of the marginal's support.
  report.slack_kl = std::max(0.0, kl_divergence(d, dtilde));

  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d(i) > 0.0) report.L_constant = std::max(report.L_constant, std::abs(std::log(d(i) / qstar.probs(i))));

  report.slack = report.L_constant * std::sqrt(2.0 * report.slack_kl);
  report.rhs = -report.kl_marginal + report.slack;
  report.holds = report.lhs <= report.rhs + 1e-9;
  return report;
}

}  // namespace vismax
