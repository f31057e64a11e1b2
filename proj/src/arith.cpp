#include "cycloscan/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cycloscan {

namespace {

constexpr u64 kTrialLimit = 1'000'000;

const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    std::vector<std::uint8_t> comp(kTrialLimit + 1, 0);
    std::vector<std::uint32_t> out;
    for (u64 i = 2; i <= kTrialLimit; ++i) {
      if (comp[i]) continue;
      out.push_back(static_cast<std::uint32_t>(i));
      for (u64 j = i * i; j <= kTrialLimit; j += i) comp[j] = 1;
    }
    return out;
  }();
  return primes;
}

bool miller_rabin_witness(u64 n, u64 d, int s, u64 a) {
  u64 x = powmod(a % n, d, n);
  if (x == 1 || x == n - 1 || x == 0) return false;
  for (int r = 1; r < s; ++r) {
    x = mulmod(x, x, n);
    if (x == n - 1) return false;
  }
  return true;
}

u64 pollard_brent(u64 n, u64 seed) {
  if (n % 2 == 0) return 2;
  u64 c = seed % (n - 1) + 1;
  u64 y = (seed >> 7) % n;
  u64 m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
  auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
  do {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    do {
      ys = y;
      for (u64 i = 0; i < std::min(m, r - k); ++i) {
        y = f(y);
        q = mulmod(q, x > y ? x - y : y - x, n);
      }
      g = gcd(q, n);
      k += m;
    } while (k < r && g == 1);
    r *= 2;
  } while (g == 1);
  if (g == n) {
    do {
      ys = f(ys);
      g = gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g;
}

void factor_rec(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  u64 seed = 1;
  u64 d = n;
  while (d == n) d = pollard_brent(n, mix64(seed++ ^ n));
  factor_rec(d, out);
  factor_rec(n / d, out);
}

}  // namespace

u64 powmod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

u64 lcm(u64 a, u64 b) {
  if (a == 0 || b == 0) return 0;
  return a / gcd(a, b) * b;
}

u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // This witness set is deterministic below 2^64.
  for (u64 a : {2, 325, 9375, 28178, 450775, 9780504, 1795265022}) {
    if (miller_rabin_witness(n, d, s, a)) return false;
  }
  return true;
}

u64 Factorization::product() const {
  u64 v = 1;
  for (const auto& [p, e] : factors) {
    for (int i = 0; i < e; ++i) v *= p;
  }
  return v;
}

bool Factorization::squarefree() const {
  return std::all_of(factors.begin(), factors.end(),
                     [](const PrimePower& pp) { return pp.exponent == 1; });
}

Factorization factorize(u64 n) {
  if (n == 0) throw std::invalid_argument("factorize: n must be positive");
  Factorization f;
  f.value = n;
  std::vector<u64> primes;
  for (std::uint32_t p : small_primes()) {
    if (static_cast<u64>(p) * p > n) break;
    while (n % p == 0) {
      primes.push_back(p);
      n /= p;
    }
  }
  if (n > 1) factor_rec(n, primes);
  std::sort(primes.begin(), primes.end());
  for (u64 p : primes) {
    if (!f.factors.empty() && f.factors.back().prime == p) {
      ++f.factors.back().exponent;
    } else {
      f.factors.push_back({p, 1});
    }
  }
  return f;
}

std::vector<u64> divisors(const Factorization& f) {
  std::vector<u64> out{1};
  for (const auto& [p, e] : f.factors) {
    const std::size_t base = out.size();
    u64 pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<u64, int>> squarefree_divisors(const Factorization& f) {
  std::vector<std::pair<u64, int>> out{{1, 1}};
  for (const auto& pp : f.factors) {
    const std::size_t base = out.size();
    for (std::size_t i = 0; i < base; ++i) {
      out.emplace_back(out[i].first * pp.prime, -out[i].second);
    }
  }
  return out;
}

int mobius(u64 m) {
  const Factorization f = factorize(m);
  if (!f.squarefree()) return 0;
  return f.factors.size() % 2 == 0 ? 1 : -1;
}

u64 euler_phi(u64 m) {
  u64 r = m;
  for (const auto& pp : factorize(m).factors) r = r / pp.prime * (pp.prime - 1);
  return r;
}

u64 tau2(u64 m) {
  u64 r = 1;
  for (const auto& pp : factorize(m).factors) r *= static_cast<u64>(pp.exponent + 1);
  return r;
}

int omega(u64 m) { return static_cast<int>(factorize(m).factors.size()); }

int valuation(u64 n, u64 prime) {
  if (n == 0) throw std::invalid_argument("valuation of zero");
  int v = 0;
  while (n % prime == 0) {
    n /= prime;
    ++v;
  }
  return v;
}

u64 big_H(u64 n) {
  u64 h = 1;
  for (const auto& [p, e] : factorize(n).factors) {
    u64 local = 0;
    for (int j = 0; j <= e; ++j) {
      u64 term = 1;
      for (int i = 0; i < j / 2; ++i) term *= p;
      local += term;
    }
    h *= local;
  }
  return h;
}

Rational::Rational(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  num_ = num / a;
  den_ = den / a;
}

double Rational::to_double() const {
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

std::string Rational::str() const {
  return den_ == 1 ? to_string(num_) : to_string(num_) + "/" + to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  const i128 g = static_cast<i128>(gcd(static_cast<u64>(a.den_), static_cast<u64>(b.den_)));
  return Rational(a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return a + Rational(-b.num_, b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational inner_mu_sum(u64 m) {
  // Every e divides m, so m is a common denominator.
  i128 total = 0;
  for (u64 k : divisors(factorize(m))) {
    for (auto [d, mu] : squarefree_divisors(factorize(k))) {
      const u64 e = k / d;
      total += static_cast<i128>(mu) * static_cast<i128>(m / e);
    }
  }
  return Rational(total, static_cast<i128>(m));
}

Rational divisor_pair_coefficient(u64 m) {
  i128 total = 0;
  for (auto [d, mu] : squarefree_divisors(factorize(m))) {
    const u64 e = m / d;
    total += static_cast<i128>(mu) * static_cast<i128>(m / e);
  }
  return Rational(total, static_cast<i128>(m));
}

void Progression::validate() const {
  if (modulus == 0) throw std::invalid_argument("progression modulus must be positive");
  if (modulus > 1 && gcd(residue % modulus, modulus) != 1) {
    throw std::invalid_argument("progression requires gcd(a, q) = 1");
  }
}

PrimeSieve::PrimeSieve(u64 hi) : limit_(hi) {
  const u64 root = isqrt(hi) + 1;
  std::vector<std::uint8_t> comp(root + 1, 0);
  for (u64 i = 2; i <= root; ++i) {
    if (comp[i]) continue;
    base_.push_back(static_cast<std::uint32_t>(i));
    for (u64 j = i * i; j <= root; j += i) comp[j] = 1;
  }
}

void PrimeSieve::sieve_segment(u64 lo, u64 hi, std::vector<std::uint8_t>& composite) const {
  composite.assign(hi - lo + 1, 0);
  for (u64 p : base_) {
    if (p * p > hi) break;
    u64 start = std::max(p * p, (lo + p - 1) / p * p);
    for (u64 j = start; j <= hi; j += p) composite[j - lo] = 1;
  }
  for (u64 n = lo; n <= std::min<u64>(hi, 1); ++n) composite[n - lo] = 1;
}

void PrimeSieve::for_each(u64 lo, u64 hi, const Progression& prog,
                          const std::function<void(u64)>& fn) const {
  if (hi > limit_) throw std::out_of_range("PrimeSieve: range exceeds sieve limit");
  lo = std::max<u64>(lo, 2);
  std::vector<std::uint8_t> composite;
  for (u64 seg = lo; seg <= hi;) {
    const u64 seg_hi = std::min(hi, seg + kSegment - 1);
    sieve_segment(seg, seg_hi, composite);
    for (u64 n = seg; n <= seg_hi; ++n) {
      if (!composite[n - seg] && prog.contains(n)) fn(n);
    }
    if (seg_hi == hi) break;
    seg = seg_hi + 1;
  }
}

u64 PrimeSieve::count(u64 lo, u64 hi) const {
  u64 c = 0;
  if (lo > hi) return 0;
  for_each(lo, hi, Progression{}, [&](u64) { ++c; });
  return c;
}

std::vector<u64> segmented_primes(u64 lo, u64 hi, const Progression& prog) {
  prog.validate();
  if (lo < 2 || lo > hi) throw std::invalid_argument("segmented_primes: need 2 <= lo <= hi");
  std::vector<u64> out;
  PrimeSieve(hi).for_each(lo, hi, prog, [&](u64 p) { out.push_back(p); });
  return out;
}

double log_integral(double x) {
  if (!(x >= 2.0)) throw std::domain_error("log_integral: x must be >= 2");
  if (x == 2.0) return 0.0;
  // Ramanujan's series for li(x), shifted by li(2).
  constexpr long double kEulerGamma = 0.57721566490153286060651209008240243L;
  constexpr long double kLi2 = 1.04516378011749278484458888919461313652L;
  const long double lx = std::log(static_cast<long double>(x));
  long double sum = 0.0L;
  long double power_over_fact = 1.0L;  // (ln x)^n / (n! 2^(n-1))
  long double inner = 0.0L;            // sum_{k <= (n-1)/2} 1/(2k+1)
  for (int n = 1; n < 400; ++n) {
    power_over_fact *= lx / n;
    if (n > 1) power_over_fact /= 2.0L;
    if ((n - 1) % 2 == 0) inner += 1.0L / (n);
    const long double term = (n % 2 == 1 ? 1.0L : -1.0L) * power_over_fact * inner;
    sum += term;
    if (n > 2 * lx && std::fabs(term) < 1e-21L * std::fabs(sum)) break;
  }
  const long double li = kEulerGamma + std::log(lx) + std::sqrt(static_cast<long double>(x)) * sum;
  return static_cast<double>(li - kLi2);
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(i128 v) {
  if (v < 0) return "-" + to_string(static_cast<u128>(-v));
  return to_string(static_cast<u128>(v));
}

u128 parse_u128(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  u128 v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("invalid decimal digit");
    const u128 next = v * 10 + static_cast<u128>(c - '0');
    if (next / 10 != v) throw std::out_of_range("integer overflow");
    v = next;
  }
  return v;
}

}  // namespace cycloscan
