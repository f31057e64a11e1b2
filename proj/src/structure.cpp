#include "cycloscan/structure.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "cycloscan/poly.hpp"

namespace cycloscan {

namespace {

constexpr unsigned kDivisionPolyMaxPrime = 7;
constexpr int kRandomSamples = 40;

std::string describe(const PrimeRecord& r) {
  return "p=" + std::to_string(r.p) + " ap=" + std::to_string(r.ap) +
         " n=" + std::to_string(r.n) + " dp=" + std::to_string(r.dp) +
         " ep=" + std::to_string(r.ep);
}

// Accumulates f_{N,P} at several evaluation points as numerator/denominator.
class MillerEvaluator {
 public:
  MillerEvaluator(const ReducedCurve& curve, std::array<CurvePoint, 2> at)
      : curve_(curve), at_(at) {
    for (auto& v : num_) v = curve.field().one();
    for (auto& v : den_) v = curve.field().one();
  }

  // Returns false if some line vanishes at an evaluation point.
  bool run(const CurvePoint& P, u64 N) {
    CurvePoint T = P;
    int top = 63;
    while (((N >> top) & 1) == 0) --top;
    for (int bit = top - 1; bit >= 0; --bit) {
      square();
      if (!step(T, T)) return false;
      if ((N >> bit) & 1) {
        if (!step(T, P)) return false;
      }
    }
    return T.infinity;
  }

  FieldElement value(std::size_t i) const {
    const auto& F = curve_.field();
    return F.mul(num_[i], F.inv(den_[i]));
  }

 private:
  void square() {
    const auto& F = curve_.field();
    for (std::size_t i = 0; i < at_.size(); ++i) {
      num_[i] = F.sqr(num_[i]);
      den_[i] = F.sqr(den_[i]);
    }
  }

  // T <- T + U, multiplying in l_{T,U} / v_{T+U}.
  bool step(CurvePoint& T, const CurvePoint& U) {
    const auto& F = curve_.field();
    if (T.infinity || U.infinity) {
      T = curve_.add(T, U);
      return true;
    }
    const CurvePoint sum = curve_.add(T, U);
    const bool vertical = T.x == U.x && (T.y != U.y || F.is_zero(T.y));
    FieldElement lambda{};
    if (!vertical) {
      if (T.x == U.x) {
        const FieldElement x2 = F.sqr(T.x);
        lambda = F.mul(F.add(F.add(F.add(x2, x2), x2), curve_.a4()), F.inv(F.add(T.y, T.y)));
      } else {
        lambda = F.mul(F.sub(U.y, T.y), F.inv(F.sub(U.x, T.x)));
      }
    }
    for (std::size_t i = 0; i < at_.size(); ++i) {
      const CurvePoint& R = at_[i];
      FieldElement line, vert = F.one();
      if (vertical) {
        line = F.sub(R.x, T.x);
      } else {
        line = F.sub(F.sub(R.y, T.y), F.mul(lambda, F.sub(R.x, T.x)));
        if (!sum.infinity) vert = F.sub(R.x, sum.x);
      }
      if (F.is_zero(line) || F.is_zero(vert)) return false;
      num_[i] = F.mul(num_[i], line);
      den_[i] = F.mul(den_[i], vert);
    }
    T = sum;
    return true;
  }

  const ReducedCurve& curve_;
  std::array<CurvePoint, 2> at_;
  std::array<FieldElement, 2> num_;
  std::array<FieldElement, 2> den_;
};

int log_order(const ReducedCurve& curve, CurvePoint pt, u64 l) {
  int k = 0;
  while (!pt.infinity) {
    pt = curve.mul(l, pt);
    ++k;
  }
  return k;
}

u64 ipow(u64 base, int e) {
  u64 r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Certifies the l-Sylow subgroup Z/l^a + Z/l^b (a <= b, a + b = v) and
// returns a. Each accepted sample only ever raises the lower bounds a_lo,
// b_lo, so a_lo + b_lo = v is a certificate.
class SylowCertifier {
 public:
  SylowCertifier(const ReducedCurve& curve, u64 n, u64 l, int v, int a_floor,
                 std::mt19937_64& rng)
      : curve_(curve), l_(l), v_(v), cofactor_(n / ipow(l, v)), a_lo_(a_floor), rng_(rng) {}

  bool certified() const { return a_lo_ + b_lo_ == v_; }
  int a() const { return a_lo_; }

  void sample(const CurvePoint& R, bool keep) {
    const CurvePoint P = curve_.mul(cofactor_, R);
    if (P.infinity) return;
    const int k = log_order(curve_, P, l_);
    if (k > b_lo_) {
      b_lo_ = k;
      best_ = P;
      for (const auto& S : kept_) pair_with_best(S);
    } else {
      pair_with_best(P);
    }
    if (keep) kept_.push_back(P);
  }

  void sweep(bool find_max_order_only) {
    const PrimeField& F = curve_.field();
    for (u64 xv = 0; xv < curve_.p() && !certified(); ++xv) {
      const FieldElement x = F.from_u64(xv);
      FieldElement y;
      if (!F.sqrt(curve_.rhs(x), y)) continue;
      if (find_max_order_only) {
        const CurvePoint P = curve_.mul(cofactor_, CurvePoint::affine(x, y));
        if (P.infinity) continue;
        const int k = log_order(curve_, P, l_);
        if (k > b_lo_) {
          b_lo_ = k;
          best_ = P;
        }
      } else {
        sample(CurvePoint::affine(x, y), false);
        if (!F.is_zero(y)) sample(CurvePoint::affine(x, F.neg(y)), false);
      }
    }
  }

 private:
  void pair_with_best(const CurvePoint& P) {
    if (b_lo_ == 0 || P.infinity) return;
    const FieldElement z = weil_pairing(curve_, best_, P, ipow(l_, b_lo_), rng_);
    a_lo_ = std::max(a_lo_, root_of_unity_log_order(curve_.field(), z, l_));
  }

  const ReducedCurve& curve_;
  u64 l_;
  int v_;
  u64 cofactor_;
  int a_lo_ = 0;
  int b_lo_ = 0;
  CurvePoint best_;
  std::vector<CurvePoint> kept_;
  std::mt19937_64& rng_;
};

}  // namespace

void check_record(const PrimeRecord& r) {
  const bool ok = r.n == static_cast<u64>(static_cast<i64>(r.p) + 1 - r.ap) && r.dp > 0 &&
                  r.dp * r.ep == r.n && r.ep % r.dp == 0 && (r.p - 1) % r.dp == 0 &&
                  r.n % (r.dp * r.dp) == 0 &&
                  static_cast<u64>(r.ap < 0 ? -r.ap : r.ap) <= hasse_width(r.p);
  if (!ok) throw KernelFault("record invariant violated: " + describe(r));
}

u64 rational_torsion_count(const ReducedCurve& curve, unsigned l, std::mt19937_64& rng) {
  const PrimeField& F = curve.field();
  const PolyRing ring(F);
  if (l == 2) {
    const Poly cubic{curve.a6(), curve.a4(), F.zero(), F.one()};
    const Poly x{F.zero(), F.one()};
    const Poly g = ring.gcd(cubic, ring.sub(ring.powmod(x, F.modulus(), cubic), x));
    return 1 + static_cast<u64>(ring.degree(g));
  }
  if (l % 2 == 0 || !is_prime(l)) throw std::invalid_argument("torsion count needs a prime l");
  if (l == F.modulus()) throw std::invalid_argument("torsion count needs l != p");
  const Poly psi = odd_division_polynomial(ring, curve.a4(), curve.a6(), l);
  u64 count = 1;
  for (FieldElement x : ring.roots(psi, rng)) {
    if (F.legendre(curve.rhs(x)) == 1) count += 2;
  }
  return count;
}

FieldElement weil_pairing(const ReducedCurve& curve, const CurvePoint& P, const CurvePoint& Q,
                          u64 N, std::mt19937_64& rng) {
  const PrimeField& F = curve.field();
  if (P.infinity || Q.infinity || P == Q) return F.one();
  for (int attempt = 0; attempt < 64; ++attempt) {
    const CurvePoint S = curve.random_point(rng);
    const CurvePoint q_plus_s = curve.add(Q, S);
    const CurvePoint p_minus_s = curve.add(P, curve.neg(S));
    const CurvePoint minus_s = curve.neg(S);
    if (q_plus_s.infinity || p_minus_s.infinity) continue;
    MillerEvaluator fp(curve, {q_plus_s, S});
    if (!fp.run(P, N)) continue;
    MillerEvaluator fq(curve, {p_minus_s, minus_s});
    if (!fq.run(Q, N)) continue;
    const FieldElement num = F.mul(fp.value(0), fq.value(1));
    const FieldElement den = F.mul(fp.value(1), fq.value(0));
    if (F.is_zero(num) || F.is_zero(den)) continue;
    return F.mul(num, F.inv(den));
  }
  throw KernelFault("weil_pairing: no admissible auxiliary point");
}

int root_of_unity_log_order(const PrimeField& field, FieldElement z, u64 l) {
  int k = 0;
  while (z != field.one()) {
    z = field.pow(z, l);
    if (++k > 64) throw KernelFault("pairing value is not an l-power root of unity");
  }
  return k;
}

GroupStructure group_structure(const ReducedCurve& curve, u64 n, std::mt19937_64& rng) {
  const u64 p = curve.p();
  const u64 g = gcd(n, p - 1);
  u64 d = 1;
  if (g > 1) {
    for (const auto& pp : factorize(g).factors) {
      const u64 l = pp.prime;
      const int v = valuation(n, l);
      const int cap = std::min(v / 2, valuation(p - 1, l));
      if (cap == 0) continue;
      int a_floor = 0;
      if (l <= kDivisionPolyMaxPrime) {
        if (rational_torsion_count(curve, static_cast<unsigned>(l), rng) < l * l) continue;
        a_floor = 1;
        if (cap == 1) {
          d *= l;
          continue;
        }
      }
      SylowCertifier cert(curve, n, l, v, a_floor, rng);
      for (int i = 0; i < kRandomSamples && !cert.certified(); ++i) {
        cert.sample(curve.random_point(rng), true);
      }
      if (!cert.certified()) {
        cert.sweep(true);
        cert.sweep(false);
      }
      if (!cert.certified() || cert.a() > cap) {
        throw KernelFault("group_structure: could not certify the " + std::to_string(l) +
                          "-part at p=" + std::to_string(p));
      }
      d *= ipow(l, cert.a());
    }
  }
  return {d, n / d};
}

bool m_torsion_rational(const ReducedCurve& curve, u64 m, const PrimeRecord& record) {
  if (curve.p() != record.p) throw std::invalid_argument("record does not match curve");
  if (m == 0) throw std::invalid_argument("m must be positive");
  return record.dp % m == 0;
}

bool is_cyclic(const PrimeRecord& record) { return record.dp == 1; }

PrimeRecord compute_record(const ReducedCurve& curve, std::mt19937_64& rng, u64 crossover) {
  PrimeRecord r;
  r.p = curve.p();
  r.n = point_count(curve, rng, crossover);
  r.ap = static_cast<i64>(r.p) + 1 - static_cast<i64>(r.n);
  const GroupStructure gs = group_structure(curve, r.n, rng);
  r.dp = gs.d;
  r.ep = gs.e;
  check_record(r);
  return r;
}

}  // namespace cycloscan
