// Integer and multiplicative-function substrate.
//
// Everything here works on 64-bit inputs: factorization is trial division
// followed by Pollard-rho (Brent), primality is deterministic Miller-Rabin.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cycloscan {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}
u64 powmod(u64 base, u64 exp, u64 m);
u64 gcd(u64 a, u64 b);
u64 lcm(u64 a, u64 b);
u64 isqrt(u64 n);

/// Deterministic for every 64-bit input.
bool is_prime(u64 n);

struct PrimePower {
  u64 prime;
  int exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
  u64 value = 1;
  std::vector<PrimePower> factors;  // ascending primes

  u64 product() const;
  bool squarefree() const;
};

Factorization factorize(u64 n);

/// All positive divisors, ascending.
std::vector<u64> divisors(const Factorization& f);
/// Squarefree divisors paired with their Moebius sign.
std::vector<std::pair<u64, int>> squarefree_divisors(const Factorization& f);

int mobius(u64 m);
u64 euler_phi(u64 m);
u64 tau2(u64 m);
int omega(u64 m);
int valuation(u64 n, u64 prime);

// H(n) = sum_{d | n} #{1 <= k <= d : d | k^2}. Multiplicative with
// H(l^e) = sum_{j=0}^{e} l^floor(j/2).
u64 big_H(u64 n);

class Rational {
 public:
  Rational() = default;
  Rational(i128 num, i128 den = 1);

  i128 num() const { return num_; }
  i128 den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const;
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  i128 num_ = 0;
  i128 den_ = 1;
};

/// sum over pairs (d, e) with de | m of mu(d)/e. Equals 1/m.
Rational inner_mu_sum(u64 m);
/// sum over pairs (d, e) with de = m of mu(d)/e, the Moebius inverse of 1/m:
/// sum_{m | n} divisor_pair_coefficient(m) = 1/n.
Rational divisor_pair_coefficient(u64 m);

/// Residue class a mod q. q = 1 selects every prime.
struct Progression {
  u64 modulus = 1;
  u64 residue = 1;

  /// Throws std::invalid_argument unless gcd(a, q) = 1 (q > 1).
  void validate() const;
  bool contains(u64 n) const { return n % modulus == residue % modulus; }
};

/// Segmented sieve of Eratosthenes. Segments are independent so callers may
/// sieve disjoint ranges concurrently; each call yields ascending primes.
class PrimeSieve {
 public:
  static constexpr u64 kSegment = u64{1} << 18;

  explicit PrimeSieve(u64 hi);

  /// Visit every prime p in [lo, hi] with p in the progression, ascending.
  void for_each(u64 lo, u64 hi, const Progression& prog,
                const std::function<void(u64)>& fn) const;
  /// Number of primes in [lo, hi] (any residue class).
  u64 count(u64 lo, u64 hi) const;
  u64 limit() const { return limit_; }

 private:
  void sieve_segment(u64 lo, u64 hi, std::vector<std::uint8_t>& composite) const;

  u64 limit_;
  std::vector<std::uint32_t> base_;
};

std::vector<u64> segmented_primes(u64 lo, u64 hi, const Progression& prog);

/// Li(x) = integral_2^x dt / log t (offset convention, Li(2) = 0).
/// Throws std::domain_error for x < 2.
double log_integral(double x);

std::string to_string(u128 v);
std::string to_string(i128 v);
u128 parse_u128(std::string_view s);

/// SplitMix64 finalizer; used to derive per-prime seeds.
inline u64 mix64(u64 z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cycloscan
