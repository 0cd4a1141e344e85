#pragma once

#include "vismax/mdp.hpp"

#include <Eigen/Sparse>

namespace vismax {

using SparseTable = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row-stochastic table indexed by (s, a) pair over a finite target set.
class ConditionalDistTable {
 public:
  ConditionalDistTable() = default;
  explicit ConditionalDistTable(Table probs) : probs_(std::move(probs)) {}

  std::size_t n_rows() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t n_targets() const { return static_cast<std::size_t>(probs_.cols()); }
  const Table& probs() const { return probs_; }
  Table& probs() { return probs_; }

  /// Throws std::invalid_argument when a row is negative or not normalized.
  void validate(double tol = 1e-10) const;

  static ConditionalDistTable uniform(std::size_t n_rows, std::size_t n_targets);

 private:
  Table probs_;
};

/// Probability vector q* over targets.
struct RelativeMeasure {
  Vector probs;

  std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
  static RelativeMeasure uniform(std::size_t n);
  void validate() const;
};

/// Sup-over-rows L1 distance between two tables of the same shape.
double sup_row_l1(const Table& a, const Table& b);

/**
 * Generalized norm Lbar_n(f) = (sup_rows sum_targets |f|^n)^(1/n).
 */
double lbar_norm(const Table& f, int n);

/**
 * KL(p || q) restricted to the support of p (0 log 0 = 0). Throws
 * std::domain_error when q is zero where p is positive.
 */
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Vector& p, const Vector& q);

/// M[(s,a)][(s',a')] = p(s'|s,a) pi(a'|s'), dense.
Table successor_matrix(const TabularMdp& mdp, const Policy& policy);
/// Same kernel in sparse form.
SparseTable successor_operator(const TabularMdp& mdp, const Policy& policy);

/// State-to-state kernel P_pi[s][s'] = sum_a pi(a|s) p(s'|s,a).
Table state_transition_matrix(const TabularMdp& mdp, const Policy& policy);

/// Iteration budget for a geometric contraction of modulus gamma.
std::size_t contraction_iteration_budget(double gamma, double tol);

/**
 * d^{pi,gamma}(sbar, abar | s, a) over (s, a) pairs by repeated application
 * of the conditional state-action operator from the uniform table. Stops when
 * successive iterates differ by less than `tol` in sup row L1 norm; throws
 * ConvergenceError past contraction_iteration_budget.
 */
ConditionalDistTable conditional_visitation(const TabularMdp& mdp, const Policy& policy, double tol = 1e-10);

/// Closed form (1 - gamma) M (I - gamma M)^{-1}. Limited to 4096 pairs.
ConditionalDistTable conditional_visitation_direct(const TabularMdp& mdp, const Policy& policy);

/// q^pi(z | s, a) as the fixed point of apply_operator_P, iterated to `tol`.
ConditionalDistTable feature_visitation(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                        double tol = 1e-10);

/// q^pi(z | s, a) = (I - gamma M)^{-1} (1 - gamma) M H via a sparse LU solve.
ConditionalDistTable feature_visitation_direct(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap);

/// q^pi contracted from an existing state-action visitation table.
ConditionalDistTable feature_visitation_from(const ConditionalDistTable& sa_visitation, const FeatureMap& fmap);

/// Marginal discounted occupancy d^{pi,gamma}(s, a) from p0, summed from t = 0.
Vector marginal_visitation(const TabularMdp& mdp, const Policy& policy);

/// Marginal discounted state occupancy d^{pi,gamma}(s) from p0.
Vector marginal_state_visitation(const TabularMdp& mdp, const Policy& policy);

/// Fault injection for the verification battery; never used outside tests.
enum class OperatorFault { None, InverseGamma };

/**
 * (P q)(z|s,a) = E_{s' ~ p(.|s,a), a' ~ pi(.|s')}[(1 - gamma) h(z|s',a') + gamma q(z|s',a')].
 */
ConditionalDistTable apply_operator_P(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                      const ConditionalDistTable& q, OperatorFault fault = OperatorFault::None);

struct ContractionReport {
  int norm_order = 1;
  std::size_t trials = 0;
  double max_violation = 0.0;  // max of Lbar(Pp, Pq) - gamma Lbar(p, q)
  double max_ratio = 0.0;      // max of Lbar(Pp, Pq) / Lbar(p, q)
  bool holds(double tol = 1e-9) const { return max_violation <= tol; }
};

/// Draws a random row-stochastic table of the given shape.
ConditionalDistTable random_conditional_table(std::size_t n_rows, std::size_t n_targets, Rng& rng);

ContractionReport verify_contraction(const TabularMdp& mdp, const Policy& policy, const FeatureMap& fmap,
                                     int norm_order, std::size_t trials, Rng& rng,
                                     OperatorFault fault = OperatorFault::None);

struct LowerBoundReport {
  double lhs = 0.0;          // E_{(s,a)~d}[-KL(d(.|s,a) || q*)]
  double rhs = 0.0;          // -KL(d || q*) + slack
  double kl_marginal = 0.0;  // KL(d || q*)
  double slack_kl = 0.0;     // KL(d || dtilde)
  double L_constant = 0.0;
  double slack = 0.0;        // L sqrt(2 KL(d || dtilde))
  bool holds = false;
};

/// Evaluates both sides of the marginal/conditional entropy lower bound with
/// state-action pairs as features. `qstar` is indexed by (s, a) pair.
LowerBoundReport verify_lower_bound(const TabularMdp& mdp, const Policy& policy, const RelativeMeasure& qstar);

}  // namespace vismax
