#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cycloscan/arith.hpp"
#include "cycloscan/montgomery.hpp"
#include "doctest.h"

using namespace cycloscan;

namespace {

bool trial_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// #{1 <= k <= d : d | k^2} summed over d | n, straight from the definition.
u64 brute_H(u64 n) {
  u64 total = 0;
  for (u64 d = 1; d <= n; ++d) {
    if (n % d) continue;
    for (u64 k = 1; k <= d; ++k) {
      if ((k * k) % d == 0) ++total;
    }
  }
  return total;
}

int brute_mobius(u64 m) {
  int sign = 1;
  for (u64 p = 2; p <= m; ++p) {
    if (m % p) continue;
    m /= p;
    if (m % p == 0) return 0;
    sign = -sign;
  }
  return sign;
}

u64 brute_phi(u64 m) {
  u64 c = 0;
  for (u64 k = 1; k <= m; ++k) c += std::gcd(k, m) == 1;
  return c;
}

// Composite Simpson rule on [2, x] in the variable u = log t.
double simpson_li(double x) {
  const double a = std::log(2.0), b = std::log(x);
  const int n = 200000;
  const double h = (b - a) / n;
  auto f = [](double u) { return std::exp(u) / u; };
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("miller-rabin agrees with trial division") {
  for (u64 n = 0; n < 100000; ++n) REQUIRE(is_prime(n) == trial_prime(n));
  CHECK(is_prime(18446744073709551557ULL));
  CHECK_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to 2,3,5,7
  CHECK_FALSE(is_prime(4294967297ULL));
}

TEST_CASE("factorize reconstructs random 63-bit integers") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const u64 n = (rng() >> 1) | 1;
    const Factorization f = factorize(n);
    REQUIRE(f.product() == n);
    u64 prev = 1;
    for (const auto& pp : f.factors) {
      REQUIRE(pp.prime > prev);
      REQUIRE(is_prime(pp.prime));
      prev = pp.prime;
    }
  }
  CHECK_THROWS_AS(factorize(0), std::invalid_argument);
  CHECK(factorize(1).factors.empty());
}

TEST_CASE("multiplicative functions against definitions") {
  for (u64 m = 1; m <= 2000; ++m) {
    REQUIRE(mobius(m) == brute_mobius(m));
    REQUIRE(euler_phi(m) == brute_phi(m));
    u64 tau = 0;
    for (u64 d = 1; d <= m; ++d) tau += m % d == 0;
    REQUIRE(tau2(m) == tau);
  }
  CHECK(omega(30) == 3);
  CHECK(omega(1) == 0);
  CHECK(valuation(48, 2) == 4);
  CHECK_THROWS(valuation(0, 2));
}

TEST_CASE("divisor lists") {
  const auto d = divisors(factorize(360));
  CHECK(d.size() == 24);
  CHECK(std::is_sorted(d.begin(), d.end()));
  const auto sq = squarefree_divisors(factorize(360));
  CHECK(sq.size() == 8);
  int total = 0;
  for (auto [m, mu] : sq) {
    CHECK(mu == mobius(m));
    total += mu;
  }
  CHECK(total == 0);
}

TEST_CASE("big H matches the double sum") {
  for (u64 n = 1; n <= 10000; n += (n < 600 ? 1 : 97)) REQUIRE(big_H(n) == brute_H(n));
  for (u64 m = 1; m <= 200; ++m) {
    for (u64 n = 1; n <= 200; ++n) {
      if (std::gcd(m, n) == 1) REQUIRE(big_H(m * n) == big_H(m) * big_H(n));
    }
  }
}

TEST_CASE("rational arithmetic") {
  const Rational a(1, 6), b(1, 3);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(-1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(Rational(4, -8) == Rational(-1, 2));
  CHECK(Rational(-1, 2).str() == "-1/2");
  CHECK(Rational(6, 3).is_integer());
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("reciprocal expansions equal 1/m") {
  std::vector<Rational> summed(10001);
  for (u64 k = 1; k <= 10000; ++k) {
    const Rational c = divisor_pair_coefficient(k);
    for (u64 n = k; n <= 10000; n += k) summed[n] += c;
  }
  for (u64 m = 1; m <= 10000; ++m) {
    REQUIRE(inner_mu_sum(m) == Rational(1, static_cast<i128>(m)));
    REQUIRE(summed[m] == Rational(1, static_cast<i128>(m)));
  }
  // de = 4: (1,4), (2,2), (4,1) -> 1/4 - 1/2 + 0
  CHECK(divisor_pair_coefficient(4) == Rational(-1, 4));
}

TEST_CASE("segmented sieve") {
  SUBCASE("matches trial division across segment boundaries") {
    const u64 hi = 3 * PrimeSieve::kSegment + 17;
    PrimeSieve sieve(hi);
    std::vector<u64> got;
    sieve.for_each(0, hi, Progression{}, [&](u64 p) { got.push_back(p); });
    std::vector<u64> want;
    for (u64 n = 0; n <= hi; ++n) {
      if (trial_prime(n)) want.push_back(n);
    }
    CHECK(got == want);
  }
  SUBCASE("split ranges concatenate") {
    PrimeSieve sieve(1000000);
    u64 whole = sieve.count(2, 1000000);
    u64 parts = sieve.count(2, 123456) + sieve.count(123457, 999999) + sieve.count(1000000, 1000000);
    CHECK(whole == 78498);
    CHECK(parts == whole);
    CHECK(sieve.count(10, 9) == 0);
    CHECK_THROWS_AS(sieve.count(2, 1000001), std::out_of_range);
  }
  SUBCASE("progressions") {
    const auto p = segmented_primes(2, 50, Progression{4, 1});
    CHECK(p == std::vector<u64>{5, 13, 17, 29, 37, 41});
    CHECK_THROWS_AS(segmented_primes(2, 50, Progression{4, 2}), std::invalid_argument);
    CHECK_THROWS_AS(segmented_primes(1, 50, Progression{}), std::invalid_argument);
  }
}

TEST_CASE("log integral") {
  CHECK(log_integral(2.0) == 0.0);
  CHECK(log_integral(1e6) == doctest::Approx(78626.50399568).epsilon(1e-12));
  for (double x : {3.0, 10.0, 1234.5, 1e5, 1e7, 1e9}) {
    CHECK(log_integral(x) == doctest::Approx(simpson_li(x)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(log_integral(1.5), std::domain_error);
}

TEST_CASE("128-bit text conversions") {
  const u128 big = (u128{1} << 100) + 12345;
  CHECK(parse_u128(to_string(big)) == big);
  CHECK(to_string(i128{-42}) == "-42");
  CHECK(to_string(u128{0}) == "0");
  CHECK_THROWS_AS(parse_u128("12a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_u128(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_u128("999999999999999999999999999999999999999999"), std::out_of_range);
}

TEST_CASE("montgomery field matches plain modular arithmetic") {
  std::mt19937_64 rng(3);
  for (u64 p : {3ULL, 7ULL, 65537ULL, 1000000007ULL, 4611686018427387847ULL}) {
    PrimeField F(p);
    for (int i = 0; i < 2000; ++i) {
      const u64 a = rng() % p, b = rng() % p;
      const auto A = F.from_u64(a), B = F.from_u64(b);
      REQUIRE(F.to_u64(F.mul(A, B)) == mulmod(a, b, p));
      REQUIRE(F.to_u64(F.add(A, B)) == (a + b) % p);
      REQUIRE(F.to_u64(F.sub(A, B)) == (a + p - b) % p);
      if (a) REQUIRE(F.to_u64(F.mul(A, F.inv(A))) == 1);
      const int leg = F.legendre(A);
      FieldElement r;
      REQUIRE(F.sqrt(A, r) == (leg >= 0));
      if (leg >= 0) REQUIRE(F.sqr(r) == A);
    }
    CHECK(F.to_u64(F.from_i64(-1)) == p - 1);
  }
}
