// Group structure E(F_p) = Z/d_p + Z/e_p with d_p | e_p.

#pragma once

#include <optional>
#include <random>

#include "cycloscan/curve.hpp"

namespace cycloscan {

/// One good prime with its Frobenius trace and invariants.
struct PrimeRecord {
  u64 p = 0;
  i64 ap = 0;
  u64 n = 0;
  u64 dp = 0;
  u64 ep = 0;

  friend bool operator==(const PrimeRecord&, const PrimeRecord&) = default;
};

/// Throws KernelFault unless n = p+1-a_p, d e = n, d | e, d | p-1, d^2 | n
/// and |a_p| <= floor(2 sqrt p).
void check_record(const PrimeRecord& r);

struct GroupStructure {
  u64 d = 1;
  u64 e = 1;
  friend bool operator==(const GroupStructure&, const GroupStructure&) = default;
};

/// Number of F_p-rational l-torsion points (including O), for l = 2 via
/// the roots of the cubic and for odd l via the division polynomial.
u64 rational_torsion_count(const ReducedCurve& curve, unsigned l, std::mt19937_64& rng);

/// Weil pairing e_N(P, Q) by Miller's algorithm. P and Q must lie in E[N];
/// the auxiliary point is resampled until no line function vanishes.
FieldElement weil_pairing(const ReducedCurve& curve, const CurvePoint& P, const CurvePoint& Q,
                          u64 N, std::mt19937_64& rng);

/// Multiplicative order of a root of unity known to divide l^k.
int root_of_unity_log_order(const PrimeField& field, FieldElement z, u64 l);

/// (d_p, e_p) given the correct group order n. Every prime l | gcd(n, p-1)
/// with l^2 | n is certified separately: torsion counting for small l, then
/// random l-Sylow samples with Weil pairing ranks, then a deterministic sweep
/// over all points. Throws KernelFault if no certificate is reached.
GroupStructure group_structure(const ReducedCurve& curve, u64 n, std::mt19937_64& rng);

/// p splits completely in Q(E[m]) iff m | d_p.
bool m_torsion_rational(const ReducedCurve& curve, u64 m, const PrimeRecord& record);

/// Cyclic reduction iff d_p = 1.
bool is_cyclic(const PrimeRecord& record);

/// Full record for a good prime: point count followed by structure.
PrimeRecord compute_record(const ReducedCurve& curve, std::mt19937_64& rng,
                           u64 crossover = 10'000);

}  // namespace cycloscan
