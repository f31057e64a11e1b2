// Short-Weierstrass curves y^2 = x^3 + a4 x + a6 over Q and their reductions.

#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycloscan/arith.hpp"
#include "cycloscan/montgomery.hpp"

namespace cycloscan {

/// Arithmetic metadata for E/Q. Conductor, CM discriminant, Serre set and
/// B_E are user-supplied; bad primes default to 2 and the primes dividing
/// 4 a4^3 + 27 a6^2.
struct CurveSpec {
  i64 a4 = 0;
  i64 a6 = 0;
  std::string label;
  u64 conductor = 1;
  std::vector<u64> bad_primes;             // ascending
  std::optional<u64> cm_disc;              // K = Q(sqrt(-D))
  std::optional<std::vector<u64>> serre_primes;
  std::optional<u64> b_e;

  /// Builds a spec with default bad primes and checks the invariants.
  static CurveSpec make(i64 a4, i64 a6, std::string label, u64 conductor);

  /// 4 a4^3 + 27 a6^2; the discriminant is -16 times this.
  i128 disc_core() const;
  bool is_bad(u64 p) const;
  bool is_cm() const { return cm_disc.has_value(); }
  /// A(E) = 2 * 3 * 5 * prod of Serre primes outside {2, 3, 5}.
  u64 serre_constant() const;
  /// M_E = product of primes dividing A(E) N_E.
  u64 radical_a_n() const;
  /// True when x^3 + a4 x + a6 has three rational roots, i.e. E[2] is rational.
  bool full_rational_two_torsion() const;

  /// Throws std::invalid_argument on a singular model or a conductor prime
  /// missing from bad_primes.
  void validate() const;
};

std::vector<u64> default_bad_primes(i64 a4, i64 a6);

struct CurvePoint {
  FieldElement x;
  FieldElement y;
  bool infinity = true;

  static CurvePoint at_infinity() { return {}; }
  static CurvePoint affine(FieldElement x, FieldElement y) { return {x, y, false}; }
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// E mod p for a prime of good reduction. Immutable; safe to share.
class ReducedCurve {
 public:
  /// Throws std::invalid_argument if the cubic is singular mod p.
  ReducedCurve(u64 p, i64 a4, i64 a6);
  ReducedCurve(PrimeField field, FieldElement a4, FieldElement a6);

  const PrimeField& field() const { return field_; }
  u64 p() const { return field_.modulus(); }
  FieldElement a4() const { return a4_; }
  FieldElement a6() const { return a6_; }

  FieldElement rhs(FieldElement x) const;
  bool on_curve(const CurvePoint& pt) const;

  CurvePoint neg(const CurvePoint& a) const;
  CurvePoint add(const CurvePoint& a, const CurvePoint& b) const;
  CurvePoint dbl(const CurvePoint& a) const;
  CurvePoint mul(u64 k, const CurvePoint& a) const;

  /// Uniform-ish random affine point (random x, random root choice).
  CurvePoint random_point(std::mt19937_64& rng) const;
  /// Quadratic twist y^2 = x^3 + a4 d^2 x + a6 d^3 by a non-residue d.
  ReducedCurve quadratic_twist() const;

 private:
  PrimeField field_;
  FieldElement a4_;
  FieldElement a6_;
};

/// Reduction mod p; nullopt marks bad reduction (p in bad_primes).
std::optional<ReducedCurve> reduce_curve(const CurveSpec& spec, u64 p);

/// Legendre symbol of a mod p (p odd prime).
int legendre(const PrimeField& field, FieldElement a);
/// Tonelli-Shanks square root; nullopt for a non-residue.
std::optional<FieldElement> sqrt_mod(const PrimeField& field, FieldElement a);

/// Thrown when a kernel produces a result that contradicts a theorem it
/// must satisfy (Hasse, Lagrange). Signals a bug, never bad input.
class KernelFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// floor(2 sqrt(p)), the Hasse half-width.
u64 hasse_width(u64 p);

/// |E(F_p)| = 1 + sum_x (1 + legendre(x^3 + a4 x + a6)). O(p).
u64 point_count_naive(const ReducedCurve& curve);

/// Shanks-Mestre baby-step giant-step order in the Hasse interval, with
/// twist disambiguation. Requires p > 457.
u64 point_count_bsgs(const ReducedCurve& curve, std::mt19937_64& rng);

/// Exact order of a point given a multiple of it.
u64 point_order(const ReducedCurve& curve, const CurvePoint& pt, u64 multiple);

/// Dispatches naive below `crossover`, BSGS above it.
u64 point_count(const ReducedCurve& curve, std::mt19937_64& rng, u64 crossover = 10'000);

}  // namespace cycloscan
