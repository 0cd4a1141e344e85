#pragma once

#include "vismax/random_mdp.hpp"
#include "vismax/visitation_oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vismax {

struct VerifyOptions {
  std::size_t trials = 100;          // random MDPs per check
  std::size_t pairs_per_mdp = 10;    // random (p, q) draws per MDP in the contraction checks
  std::uint64_t seed = 20240607;
  OperatorFault fault = OperatorFault::None;
};

struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  double max_violation = 0.0;  // positive part is the failure margin
  double tolerance = 0.0;
  std::string detail;

  bool passed() const { return max_violation <= tolerance; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  /// One line per check: name, max violation, PASS or FAIL.
  void write(std::ostream& os) const;
};

CheckResult check_contraction(int norm_order, const VerifyOptions& opts);
CheckResult check_fixed_point(const VerifyOptions& opts);
CheckResult check_identity_special_case(const VerifyOptions& opts);
CheckResult check_lower_bound(const VerifyOptions& opts);
CheckResult check_lower_bound_equality(const VerifyOptions& opts);
CheckResult check_factorization(const VerifyOptions& opts);

VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace vismax
