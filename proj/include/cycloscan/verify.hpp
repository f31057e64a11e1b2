// Identity and oracle suite behind `cycloscan verify`.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cycloscan/config.hpp"

namespace cycloscan {

/// (d, e) by listing every point of E(F_p) and taking the lcm of point orders.
GroupStructure enumerate_structure(const ReducedCurve& curve);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  void print(std::ostream& os) const;
};

/// Structure oracle for good primes p <= limit.
CheckResult check_structure_oracle(const CurveSpec& curve, u64 limit, u64 seed);
/// inner_mu_sum(m) = 1/m and sum_{k | n} divisor_pair_coefficient(k) = 1/n for m, n <= limit.
CheckResult check_reciprocal_expansion(u64 limit);
/// |delta_m - gamma/degree| <= 4 stderr for every m <= M where the exact
/// backend applies; skipped (pass) when none does.
CheckResult check_backend_agreement(const JobConfig& job, const ScanResult& data);

/// Scans to the verify x (in memory) and runs the whole suite.
VerifyReport run_verify(const JobConfig& job);

}  // namespace cycloscan
