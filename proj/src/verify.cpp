#include "cycloscan/verify.hpp"

#include <cmath>
#include <sstream>

namespace cycloscan {

GroupStructure enumerate_structure(const ReducedCurve& curve) {
  const PrimeField& F = curve.field();
  std::vector<CurvePoint> points{CurvePoint::at_infinity()};
  for (u64 xv = 0; xv < curve.p(); ++xv) {
    const FieldElement x = F.from_u64(xv);
    FieldElement y;
    if (!F.sqrt(curve.rhs(x), y)) continue;
    points.push_back(CurvePoint::affine(x, y));
    if (!F.is_zero(y)) points.push_back(CurvePoint::affine(x, F.neg(y)));
  }
  const u64 n = points.size();
  u64 exponent = 1;
  for (const auto& pt : points) exponent = lcm(exponent, point_order(curve, pt, n));
  return {n / exponent, exponent};
}

bool VerifyReport::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void VerifyReport::print(std::ostream& os) const {
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
  }
}

CheckResult check_structure_oracle(const CurveSpec& curve, u64 limit, u64 seed) {
  CheckResult r{"structure oracle p <= " + std::to_string(limit), true, ""};
  u64 checked = 0;
  for (u64 p = 3; p <= limit; ++p) {
    if (!is_prime(p)) continue;
    const auto E = reduce_curve(curve, p);
    if (!E) continue;
    std::mt19937_64 rng(mix64(seed ^ mix64(p)));
    const PrimeRecord rec = compute_record(*E, rng);
    const GroupStructure want = enumerate_structure(*E);
    ++checked;
    if (rec.dp != want.d || rec.ep != want.e) {
      r.pass = false;
      r.detail = "mismatch at p=" + std::to_string(p) + ": got (" + std::to_string(rec.dp) + "," +
                 std::to_string(rec.ep) + "), oracle (" + std::to_string(want.d) + "," +
                 std::to_string(want.e) + ")";
      return r;
    }
  }
  r.detail = std::to_string(checked) + " primes";
  return r;
}

CheckResult check_reciprocal_expansion(u64 limit) {
  CheckResult r{"reciprocal expansion m <= " + std::to_string(limit), true, ""};
  std::vector<Rational> summed(limit + 1);
  for (u64 k = 1; k <= limit; ++k) {
    const Rational c = divisor_pair_coefficient(k);
    for (u64 n = k; n <= limit; n += k) summed[n] += c;
  }
  for (u64 m = 1; m <= limit; ++m) {
    const Rational want(1, static_cast<i128>(m));
    if (inner_mu_sum(m) != want || summed[m] != want) {
      r.pass = false;
      r.detail = "fails at m=" + std::to_string(m);
      return r;
    }
  }
  return r;
}

CheckResult check_backend_agreement(const JobConfig& job, const ScanResult& data) {
  CheckResult r{"backend agreement", true, ""};
  const CurveSpec& curve = job.scan.curve;
  const u64 x = data.snapshots.empty() ? 0 : data.snapshots.back().x;
  const HoldoutSample sample = make_holdout(data.records, x / 2, x, job.scan.prog);
  if (sample.trials < kMinHoldoutTrials) {
    r.detail = "skipped: holdout has " + std::to_string(sample.trials) + " primes";
    return r;
  }
  const u64 q = job.scan.prog.modulus;
  const u64 a = q == 1 ? 1 : job.scan.prog.residue % q;
  std::ostringstream used;
  int count = 0;
  for (u64 m = 2; m <= job.effective_truncation(); ++m) {
    GenericDegree g;
    try {
      g = generic_degree(curve, m, q, a, job.assume_surjective);
    } catch (const GenericityError&) {
      continue;
    }
    const EmpiricalDelta d = empirical_delta(sample, m);
    const double expect = g.gamma / static_cast<double>(g.degree);
    const double n = static_cast<double>(sample.trials);
    // The hypothesised density also gives a stderr; it stays positive when no hit is seen.
    const double se = std::max(d.stderr_, std::sqrt(expect * (1 - expect) / n));
    ++count;
    if (std::fabs(d.delta - expect) > 4 * se) {
      r.pass = false;
      r.detail = "m=" + std::to_string(m) + ": measured " + std::to_string(d.delta) +
                 ", generic " + std::to_string(expect) + ", stderr " + std::to_string(se);
      return r;
    }
  }
  r.detail = count == 0 ? "skipped: no m in the genericity window"
                        : std::to_string(count) + " values of m";
  return r;
}

VerifyReport run_verify(const JobConfig& job) {
  VerifyReport rep;
  ScanConfig sc = job.scan;
  sc.x_max = job.verify_x.value_or(job.scan.x_max);
  sc.checkpoints.clear();
  for (u64 c : job.scan.checkpoints) {
    if (c <= sc.x_max) sc.checkpoints.push_back(c);
  }
  const ScanResult data = run_scan(sc);

  const IdentityReport ie = inclusion_exclusion_check(data, sc.x_max);
  rep.checks.push_back({"inclusion-exclusion", ie.pass,
                        ie.pass ? std::to_string(ie.rows.size()) + " checkpoints, residual 0"
                                : ie.message});
  const ExponentReport ex = exponent_identity_check(data.records);
  rep.checks.push_back({"exponent identity", ex.pass,
                        ex.pass ? "sum e_p = " + ex.sum_e.str() : ex.message});

  const Accumulator& last = data.snapshots.back();
  const bool counts_ok = last.exponent_sum == static_cast<u128>(ex.sum_e.num()) &&
                         last.prime_count == data.records.size();
  rep.checks.push_back({"accumulator totals", counts_ok, ""});

  const double c = split_bound_constant(last);
  rep.checks.push_back({"split count bound", true,
                        "max m^2 pi_{E,m}/x = " + std::to_string(c) + (c > 10 ? " (flagged)" : "")});

  rep.checks.push_back(check_structure_oracle(sc.curve, job.oracle_limit, sc.seed));
  rep.checks.push_back(check_reciprocal_expansion(2000));
  rep.checks.push_back(check_backend_agreement(job, data));
  return rep;
}

}  // namespace cycloscan
