// Dense univariate polynomials over F_p, sized for division polynomials of
// small primes (degree well below 100). Coefficients are little-endian.

#pragma once

#include <random>
#include <vector>

#include "cycloscan/montgomery.hpp"

namespace cycloscan {

using Poly = std::vector<FieldElement>;

class PolyRing {
 public:
  explicit PolyRing(const PrimeField& field) : f_(field) {}

  const PrimeField& field() const { return f_; }

  int degree(const Poly& a) const;
  void trim(Poly& a) const;
  Poly add(const Poly& a, const Poly& b) const;
  Poly sub(const Poly& a, const Poly& b) const;
  Poly mul(const Poly& a, const Poly& b) const;
  Poly scale(const Poly& a, FieldElement c) const;
  Poly mod(const Poly& a, const Poly& m) const;
  Poly monic(const Poly& a) const;
  Poly gcd(Poly a, Poly b) const;
  Poly powmod(const Poly& base, u64 e, const Poly& m) const;
  FieldElement eval(const Poly& a, FieldElement x) const;

  /// Distinct roots in F_p of a nonzero polynomial, ascending by canonical value.
  std::vector<FieldElement> roots(const Poly& a, std::mt19937_64& rng) const;

 private:
  void split(const Poly& g, std::mt19937_64& rng, std::vector<FieldElement>& out) const;

  const PrimeField& f_;
};

/// Division polynomial psi_l for odd l on y^2 = x^3 + a4 x + a6; a polynomial
/// in x of degree (l^2 - 1)/2 whose roots are the x-coordinates of the
/// nonzero l-torsion points.
Poly odd_division_polynomial(const PolyRing& ring, FieldElement a4, FieldElement a6, unsigned l);

}  // namespace cycloscan
