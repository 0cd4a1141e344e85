#include "vismax/verify.hpp"

#include "vismax/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace vismax {

namespace {

// Each check draws from its own stream so they can run in isolation.
Rng check_rng(const VerifyOptions& opts, std::uint64_t stream) { return make_rng(opts.seed, stream); }

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

void VerifyReport::write(std::ostream& os) const {
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  for (const auto& c : checks) {
    os << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::scientific << std::setprecision(3)
       << std::setw(10) << c.max_violation << "  " << (c.passed() ? "PASS" : "FAIL");
    os << "  trials=" << c.trials;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << std::defaultfloat;
}

CheckResult check_contraction(int norm_order, const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 10 + static_cast<std::uint64_t>(norm_order));
  CheckResult res{"contraction_n" + std::to_string(norm_order), opts.trials,
                  -std::numeric_limits<double>::infinity(), 1e-9, {}};
  double max_ratio = 0.0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const RandomInstance inst = random_instance({}, rng);
    const ContractionReport rep =
        verify_contraction(inst.mdp, inst.policy, inst.features, norm_order, opts.pairs_per_mdp, rng, opts.fault);
    res.max_violation = std::max(res.max_violation, rep.max_violation);
    max_ratio = std::max(max_ratio, rep.max_ratio / std::max(inst.mdp.gamma(), 1e-300));
  }
  std::ostringstream d;
  d << "max_ratio_over_gamma=" << std::setprecision(6) << max_ratio;
  res.detail = d.str();
  return res;
}

CheckResult check_fixed_point(const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 20);
  CheckResult res{"fixed_point", opts.trials, 0.0, 1e-8, {}};
  double worst_paths = 0.0, worst_residual = 0.0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const RandomInstance inst = random_instance({}, rng);
    const auto iter_sa = conditional_visitation(inst.mdp, inst.policy);
    const auto direct_sa = conditional_visitation_direct(inst.mdp, inst.policy);
    const auto iter_z = feature_visitation(inst.mdp, inst.policy, inst.features);
    const auto direct_z = feature_visitation_direct(inst.mdp, inst.policy, inst.features);
    const auto moved = apply_operator_P(inst.mdp, inst.policy, inst.features, direct_z, opts.fault);
    worst_paths = std::max({worst_paths, sup_row_l1(iter_sa.probs(), direct_sa.probs()),
                            sup_row_l1(iter_z.probs(), direct_z.probs())});
    worst_residual = std::max(worst_residual, sup_row_l1(moved.probs(), direct_z.probs()));
  }
  res.max_violation = std::max(worst_paths, worst_residual);
  std::ostringstream d;
  d << std::scientific << std::setprecision(3) << "paths=" << worst_paths << " residual=" << worst_residual;
  res.detail = d.str();
  return res;
}

CheckResult check_identity_special_case(const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 30);
  CheckResult res{"identity_special_case", opts.trials, 0.0, 1e-10, {}};
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const RandomInstance inst = random_instance({}, rng);
    const FeatureMap id = FeatureMap::identity(inst.mdp.n_pairs());
    const auto via_features = feature_visitation_direct(inst.mdp, inst.policy, id);
    const auto direct = conditional_visitation_direct(inst.mdp, inst.policy);
    res.max_violation =
        std::max(res.max_violation, (via_features.probs() - direct.probs()).cwiseAbs().maxCoeff());
  }
  return res;
}

CheckResult check_lower_bound(const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 40);
  CheckResult res{"lower_bound", opts.trials, -std::numeric_limits<double>::infinity(), 1e-9, {}};
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const double gamma = (t % 2 == 0) ? 0.5 : 0.9;
    RandomMdpOptions mo;
    mo.max_states = 5;
    mo.max_actions = 2;
    const TabularMdp mdp = random_mdp(mo, rng).with_gamma(gamma);
    const Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const LowerBoundReport rep = verify_lower_bound(mdp, pi, RelativeMeasure::uniform(mdp.n_pairs()));
    res.max_violation = std::max(res.max_violation, rep.lhs - rep.rhs);
    min_slack = std::min(min_slack, rep.rhs - rep.lhs);
  }
  std::ostringstream d;
  d << "min_gap=" << std::setprecision(6) << min_slack;
  res.detail = d.str();
  return res;
}

CheckResult check_lower_bound_equality(const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 50);
  CheckResult res{"lower_bound_equality", opts.trials, 0.0, 1e-9, {}};
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const double gamma = uniform01(rng) * 0.99;
    const double qv = 0.05 + 0.95 * uniform01(rng);
    const TabularMdp mdp(Table::Ones(1, 1), Vector::Ones(1), Table::Zero(1, 1), gamma);
    RelativeMeasure q;
    q.probs = Vector::Constant(1, qv);
    // A sub-probability q* keeps the bound non-trivial: both sides equal log q*.
    const LowerBoundReport rep = verify_lower_bound(mdp, Policy::Ones(1, 1), q);
    res.max_violation = std::max({res.max_violation, std::abs(rep.lhs - rep.rhs), std::abs(rep.slack)});
  }
  return res;
}

CheckResult check_factorization(const VerifyOptions& opts) {
  Rng rng = check_rng(opts, 60);
  CheckResult res{"factorization", opts.trials, 0.0, 1e-10, {}};
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const RandomInstance inst = random_instance({}, rng);
    const TabularMdp& mdp = inst.mdp;
    const Table d = conditional_visitation_direct(mdp, inst.policy).probs();
    const auto na = static_cast<Eigen::Index>(mdp.n_actions());
    for (Eigen::Index row = 0; row < d.rows(); ++row) {
      for (Eigen::Index sb = 0; sb < static_cast<Eigen::Index>(mdp.n_states()); ++sb) {
        const double state_mass = d.row(row).segment(sb * na, na).sum();
        for (Eigen::Index ab = 0; ab < na; ++ab)
          res.max_violation =
              std::max(res.max_violation, std::abs(d(row, sb * na + ab) - inst.policy(sb, ab) * state_mass));
      }
    }
  }
  return res;
}

VerifyReport run_verification(const VerifyOptions& opts) {
  VerifyReport report;
  report.checks.push_back(check_contraction(1, opts));
  report.checks.push_back(check_contraction(2, opts));
  report.checks.push_back(check_fixed_point(opts));
  report.checks.push_back(check_identity_special_case(opts));
  report.checks.push_back(check_lower_bound(opts));
  report.checks.push_back(check_lower_bound_equality(opts));
  report.checks.push_back(check_factorization(opts));
  return report;
}

}  // namespace vismax
