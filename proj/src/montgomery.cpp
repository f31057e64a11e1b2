#include "cycloscan/montgomery.hpp"

#include <stdexcept>

namespace cycloscan {

PrimeField::PrimeField(u64 p) : p_(p) {
  if (p < 3 || p % 2 == 0 || p >= (u64{1} << 62)) {
    throw std::invalid_argument("PrimeField: modulus must be an odd prime below 2^62");
  }
  // Newton iteration for p^{-1} mod 2^64.
  u64 inv = p;
  for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
  pinv_neg_ = ~inv + 1;
  const u128 r = (static_cast<u128>(1) << 64) % p;
  one_ = static_cast<u64>(r);
  r2_ = static_cast<u64>(r * r % p);

  odd_part_ = p - 1;
  two_adicity_ = 0;
  while ((odd_part_ & 1) == 0) {
    odd_part_ >>= 1;
    ++two_adicity_;
  }
  for (u64 z = 2;; ++z) {
    FieldElement c = from_u64(z);
    if (legendre(c) == -1) {
      nonresidue_ = c;
      break;
    }
  }
}

FieldElement PrimeField::from_i64(i64 v) const {
  i64 r = v % static_cast<i64>(p_);
  if (r < 0) r += static_cast<i64>(p_);
  return from_u64(static_cast<u64>(r));
}

FieldElement PrimeField::pow(FieldElement a, u64 e) const {
  FieldElement r = one();
  while (e) {
    if (e & 1) r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

FieldElement PrimeField::inv(FieldElement a) const {
  const u64 v = to_u64(a);
  if (v == 0) throw std::domain_error("PrimeField::inv: zero has no inverse");
  i64 t = 0, new_t = 1;
  u64 r = p_, new_r = v;
  while (new_r != 0) {
    const u64 q = r / new_r;
    const i64 tmp_t = t - static_cast<i64>(q) * new_t;
    t = new_t;
    new_t = tmp_t;
    const u64 tmp_r = r - q * new_r;
    r = new_r;
    new_r = tmp_r;
  }
  return from_i64(t);
}

int PrimeField::legendre(FieldElement a) const {
  if (is_zero(a)) return 0;
  return pow(a, (p_ - 1) / 2) == one() ? 1 : -1;
}

bool PrimeField::sqrt(FieldElement a, FieldElement& root) const {
  if (is_zero(a)) {
    root = zero();
    return true;
  }
  if (legendre(a) != 1) return false;
  int m = two_adicity_;
  FieldElement c = pow(nonresidue_, odd_part_);
  FieldElement t = pow(a, odd_part_);
  FieldElement r = pow(a, (odd_part_ + 1) / 2);
  while (t != one()) {
    int i = 0;
    FieldElement t2 = t;
    while (t2 != one()) {
      t2 = sqr(t2);
      ++i;
    }
    FieldElement b = c;
    for (int j = 0; j < m - i - 1; ++j) b = sqr(b);
    m = i;
    c = sqr(b);
    t = mul(t, c);
    r = mul(r, b);
  }
  root = r;
  return true;
}

}  // namespace cycloscan
