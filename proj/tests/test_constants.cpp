#include <cmath>
#include <numeric>

#include "cycloscan/constants.hpp"
#include "cycloscan/scan.hpp"
#include "doctest.h"

using namespace cycloscan;

namespace {

// Counts invertible 2x2 matrices over Z/m directly.
u64 count_gl2(u64 m) {
  u64 c = 0;
  for (u64 a = 0; a < m; ++a)
    for (u64 b = 0; b < m; ++b)
      for (u64 cc = 0; cc < m; ++cc)
        for (u64 d = 0; d < m; ++d) {
          const u64 det = (a * d + m * m - (b * cc) % m) % m;
          c += std::gcd(det, m) == 1;
        }
  return c;
}

// prod over primes l <= L of (1 - 1/(l (l-1) (l^2-1))), by trial division.
long double product_oracle(u64 L) {
  long double prod = 1;
  for (u64 l = 2; l <= L; ++l) {
    bool prime = true;
    for (u64 d = 2; d * d <= l; ++d) prime &= l % d != 0;
    if (!prime) continue;
    const long double x = l;
    prod *= 1 - 1 / (x * (x - 1) * (x * x - 1));
  }
  return prod;
}

CurveSpec generic_curve() { return CurveSpec::make(1, 1, "x3_x_1", 496); }

}  // namespace

TEST_CASE("gl2 orders") {
  CHECK(gl2_order(1) == 1);
  CHECK(gl2_order(2) == 6);
  CHECK(gl2_order(6) == 288);
  for (u64 m = 2; m <= 12; ++m) CHECK(gl2_order(m) == count_gl2(m));
  CHECK_THROWS_AS(gl2_order(u64{1} << 20), std::overflow_error);
}

TEST_CASE("generic degrees") {
  CHECK(generic_degree(1, 5, 2) == GenericDegree{4, 1});
  CHECK(generic_degree(2, 7, 3) == GenericDegree{36, 1});
  CHECK(generic_degree(3, 3, 2).gamma == 0);
  CHECK(generic_degree(3, 3, 1) == GenericDegree{48, 1});
  const CurveSpec E = generic_curve();
  CHECK_THROWS_AS(generic_degree(E, 2, 1, 1, false), GenericityError);
  CHECK_THROWS_AS(generic_degree(E, 10, 1, 1, false), GenericityError);
  CHECK(generic_degree(E, 7, 1, 1, false) == GenericDegree{2016, 1});
  CHECK(generic_degree(E, 2, 1, 1, true) == GenericDegree{6, 1});
  CurveSpec cm = CurveSpec::make(-1, 0, "x3_mx", 32);
  cm.cm_disc = 1;
  CHECK_THROWS_AS(generic_degree(cm, 7, 1, 1, true), GenericityError);
}

TEST_CASE("exact cyclicity constant") {
  const CurveSpec E = generic_curve();
  ConstantsOptions o;
  o.M = 1;
  CHECK(c_constant(E, o).value == 1.0);
  o.prog = Progression{5, 2};
  CHECK(c_constant(E, o).value == doctest::Approx(0.25));
  o.prog = Progression{};
  o.M = 50;
  CHECK_THROWS_AS(c_constant(E, o), GenericityError);
  o.assume_surjective = true;
  const DensityEstimate c50 = c_constant(E, o);
  CHECK(std::fabs(c50.value) <= 1);
  CHECK(c50.truncation_bound > 0);
  CHECK(c50.truncation_constant == doctest::Approx(50 * c50.truncation_bound));
  o.M = 100;
  const DensityEstimate c100 = c_constant(E, o);
  CHECK(std::fabs(c50.value - c100.value) <= c50.truncation_bound);
}

TEST_CASE("smooth support reproduces the euler product") {
  const CurveSpec E = generic_curve();
  ConstantsOptions o;
  o.assume_surjective = true;
  o.smooth_support = true;
  for (u64 M : {10ULL, 50ULL, 200ULL}) {
    o.M = M;
    const double v = c_constant(E, o).value;
    CHECK(std::fabs(v - static_cast<double>(product_oracle(M))) < 1e-12);
  }
  o.smooth_support = false;
  o.M = 10;
  const double plain = c_constant(E, o).value;
  CHECK(std::fabs(plain - static_cast<double>(product_oracle(10))) > 1e-6);
  CHECK(gl2_euler_product(1000) == doctest::Approx(static_cast<double>(product_oracle(1000))).epsilon(1e-14));
}

TEST_CASE("exponent constant") {
  const CurveSpec E = generic_curve();
  ConstantsOptions o;
  o.kind = DensityKind::exponent;
  o.assume_surjective = true;
  o.M = 1;
  o.prog = Progression{5, 1};
  CHECK(e_constant(E, o).value == doctest::Approx(0.25));
  o.prog = Progression{};
  o.M = 4;
  o.form = ExponentForm::divides_literal;
  const DensityEstimate lit = e_constant(E, o);
  REQUIRE(lit.terms.size() == 4);
  CHECK(lit.terms[3].weight == doctest::Approx(0.25));
  o.form = ExponentForm::mobius_inverse;
  const DensityEstimate inv = e_constant(E, o);
  CHECK(inv.terms[3].weight == doctest::Approx(-0.25));
  o.form = ExponentForm::printed;
  CHECK(e_constant(E, o).terms[3].weight == 0.0);
  o.form = ExponentForm::mobius_inverse;
  o.M = 50;
  const double e50 = e_constant(E, o).value;
  o.M = 100;
  const double e100 = e_constant(E, o).value;
  CHECK(std::fabs(e50 - e100) < 0.03);
  o.smooth_support = true;
  CHECK_THROWS_AS(e_constant(E, o), std::invalid_argument);
}

TEST_CASE("truncation tail") {
  for (u64 M = 1; M < 200; ++M) {
    CHECK(truncation_tail(M + 1, true) <= truncation_tail(M, true));
    CHECK(truncation_tail(M, true) <= truncation_tail(M, false));
  }
  // sum_{m > 30} 1/phi(m)^2 directly to 10^6 plus the crude remainder 5/10^6
  double direct = 0;
  for (u64 m = 31; m <= 1000000; ++m) {
    const double f = static_cast<double>(euler_phi(m));
    direct += 1 / (f * f);
  }
  CHECK(truncation_tail(30, false) == doctest::Approx(direct + 5e-6).epsilon(1e-9));
}

TEST_CASE("rational 2-torsion closes the cyclicity constant") {
  CurveSpec E = CurveSpec::make(-1, 0, "x3_mx", 32);
  E.cm_disc = 1;
  ConstantsOptions o;
  for (u64 M : {2ULL, 3ULL, 10ULL, 50ULL, 101ULL}) {
    o.M = M;
    const DensityEstimate est = c_constant(E, o);
    CHECK(est.value == 0.0);
    CHECK(est.truncation_bound == 0.0);
  }
  o.M = 1;
  CHECK(c_constant(E, o).value == 1.0);
}

TEST_CASE("empirical densities") {
  ScanConfig sc;
  sc.curve = CurveSpec::make(-1, 0, "x3_mx", 32);
  sc.x_max = 40000;
  const ScanResult r = run_scan(sc);
  const HoldoutSample s = make_holdout(r.records, 20000, 40000, Progression{});
  CHECK(s.trials == PrimeSieve(40000).count(20001, 40000));
  const EmpiricalDelta d1 = empirical_delta(s, 1);
  CHECK(d1.delta == 1.0);
  CHECK(d1.stderr_ == 0.0);
  CHECK(empirical_delta(s, 2).delta == 1.0);

  ConstantsOptions o;
  o.backend = Backend::empirical;
  o.M = 30;
  o.sample = &s;
  const DensityEstimate est = c_constant(sc.curve, o);
  CHECK(std::fabs(est.value) < 1e-12);

  const HoldoutSample small = make_holdout(r.records, 39000, 40000, Progression{});
  CHECK(small.trials < kMinHoldoutTrials);
  CHECK_THROWS_AS(empirical_delta(small, 2), std::invalid_argument);
  o.sample = nullptr;
  CHECK_THROWS_AS(c_constant(sc.curve, o), std::invalid_argument);
}

TEST_CASE("hybrid backend mixes exact and measured terms") {
  ScanConfig sc;
  sc.curve = generic_curve();
  sc.x_max = 100000;
  const ScanResult r = run_scan(sc);
  const HoldoutSample s = make_holdout(r.records, 50000, 100000, Progression{});
  ConstantsOptions o;
  o.backend = Backend::hybrid;
  o.M = 30;
  o.sample = &s;
  const DensityEstimate est = c_constant(sc.curve, o);
  for (const auto& t : est.terms) {
    const bool generic = std::gcd(t.m, u64{30}) == 1;
    CHECK(t.empirical == !generic);
  }
  CHECK(est.statistical_error > 0);
  const DensityEstimate back = estimate_from_json(estimate_to_json(est));
  CHECK(back.value == est.value);
  CHECK(back.terms.size() == est.terms.size());
  CHECK(back.backend == Backend::hybrid);
}

TEST_CASE("names parse back") {
  for (Backend b : {Backend::exact_generic, Backend::empirical, Backend::hybrid}) {
    CHECK(parse_backend(to_string(b)) == b);
  }
  for (ExponentForm f : {ExponentForm::mobius_inverse, ExponentForm::divides_literal, ExponentForm::printed}) {
    CHECK(parse_exponent_form(to_string(f)) == f);
  }
  CHECK(parse_kind("exponent") == DensityKind::exponent);
  CHECK_THROWS_AS(parse_backend("magic"), std::invalid_argument);
}
