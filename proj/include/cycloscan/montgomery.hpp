// Prime-field arithmetic in Montgomery form, R = 2^64, modulus p < 2^62.

#pragma once

#include <cstdint>

#include "cycloscan/arith.hpp"

namespace cycloscan {

/// Element of F_p stored in Montgomery representation. Only meaningful
/// together with the PrimeField that produced it.
struct FieldElement {
  u64 mont = 0;
  friend bool operator==(FieldElement, FieldElement) = default;
};

class PrimeField {
 public:
  explicit PrimeField(u64 p);

  u64 modulus() const { return p_; }

  FieldElement from_u64(u64 v) const { return {reduce(static_cast<u128>(v % p_) * r2_)}; }
  FieldElement from_i64(i64 v) const;
  u64 to_u64(FieldElement a) const { return reduce(a.mont); }

  FieldElement zero() const { return {0}; }
  FieldElement one() const { return {one_}; }
  bool is_zero(FieldElement a) const { return a.mont == 0; }

  FieldElement add(FieldElement a, FieldElement b) const {
    u64 s = a.mont + b.mont;
    return {s >= p_ ? s - p_ : s};
  }
  FieldElement sub(FieldElement a, FieldElement b) const {
    return {a.mont >= b.mont ? a.mont - b.mont : a.mont + p_ - b.mont};
  }
  FieldElement neg(FieldElement a) const { return {a.mont == 0 ? 0 : p_ - a.mont}; }
  FieldElement mul(FieldElement a, FieldElement b) const {
    return {reduce(static_cast<u128>(a.mont) * b.mont)};
  }
  FieldElement sqr(FieldElement a) const { return mul(a, a); }
  FieldElement pow(FieldElement a, u64 e) const;
  /// Inverse of a nonzero element (extended Euclid on the canonical value).
  FieldElement inv(FieldElement a) const;

  /// Euler criterion: 1, -1 or 0.
  int legendre(FieldElement a) const;
  /// Tonelli-Shanks. Returns false if a is a non-residue.
  bool sqrt(FieldElement a, FieldElement& root) const;

 private:
  u64 reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * pinv_neg_;
    const u128 s = t + static_cast<u128>(m) * p_;
    u64 r = static_cast<u64>(s >> 64);
    return r >= p_ ? r - p_ : r;
  }

  u64 p_;
  u64 pinv_neg_;  // -p^{-1} mod 2^64
  u64 r2_;        // R^2 mod p
  u64 one_;       // R mod p
  // Tonelli-Shanks data: p - 1 = odd * 2^two_adicity
  u64 odd_part_;
  int two_adicity_;
  FieldElement nonresidue_;
};

}  // namespace cycloscan
