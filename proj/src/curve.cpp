#include "cycloscan/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cycloscan {

namespace {

i128 mod_i128(i128 a, u64 m) {
  i128 r = a % static_cast<i128>(m);
  return r < 0 ? r + static_cast<i128>(m) : r;
}

i128 eval_cubic(i64 a4, i64 a6, i128 x) { return x * x * x + a4 * x + a6; }

}  // namespace

std::vector<u64> default_bad_primes(i64 a4, i64 a6) {
  const i128 core = static_cast<i128>(4) * a4 * a4 * a4 + static_cast<i128>(27) * a6 * a6;
  if (core == 0) throw std::invalid_argument("singular model: 4a4^3 + 27a6^2 = 0");
  std::vector<u64> out{2};
  u128 mag = static_cast<u128>(core < 0 ? -core : core);
  // Strip small primes by hand so factorize only sees a 64-bit cofactor.
  for (u64 p = 2; p < 1'000'000 && mag > 1 && mag > (static_cast<u128>(1) << 63); ++p) {
    if (mag % p == 0) {
      out.push_back(p);
      while (mag % p == 0) mag /= p;
    }
  }
  if (mag > (static_cast<u128>(1) << 63)) {
    throw std::invalid_argument("discriminant too large to factor");
  }
  if (mag > 1) {
    for (const auto& pp : factorize(static_cast<u64>(mag)).factors) out.push_back(pp.prime);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CurveSpec CurveSpec::make(i64 a4, i64 a6, std::string label, u64 conductor) {
  CurveSpec spec;
  spec.a4 = a4;
  spec.a6 = a6;
  spec.label = std::move(label);
  spec.conductor = conductor;
  spec.bad_primes = default_bad_primes(a4, a6);
  spec.validate();
  return spec;
}

i128 CurveSpec::disc_core() const {
  return static_cast<i128>(4) * a4 * a4 * a4 + static_cast<i128>(27) * a6 * a6;
}

bool CurveSpec::is_bad(u64 p) const {
  return std::binary_search(bad_primes.begin(), bad_primes.end(), p);
}

u64 CurveSpec::serre_constant() const {
  u64 a = 30;
  if (serre_primes) {
    for (u64 l : *serre_primes) {
      if (l > 5 && a % l != 0) a *= l;
    }
  }
  return a;
}

u64 CurveSpec::radical_a_n() const {
  u64 m = serre_constant();
  for (const auto& pp : factorize(conductor).factors) {
    if (m % pp.prime != 0) m *= pp.prime;
  }
  return m;
}

bool CurveSpec::full_rational_two_torsion() const {
  // Rational roots of a monic integer cubic are integers dividing a6.
  std::vector<i64> roots;
  if (a6 == 0) {
    roots.push_back(0);
    if (a4 <= 0) {
      const u64 r = isqrt(static_cast<u64>(-a4));
      if (static_cast<i64>(r * r) == -a4 && r != 0) {
        roots.push_back(static_cast<i64>(r));
        roots.push_back(-static_cast<i64>(r));
      }
    }
  } else {
    const u64 mag = static_cast<u64>(a6 < 0 ? -a6 : a6);
    for (u64 d : divisors(factorize(mag))) {
      for (i64 s : {1, -1}) {
        const i64 x = s * static_cast<i64>(d);
        if (eval_cubic(a4, a6, x) == 0) roots.push_back(x);
      }
    }
  }
  return roots.size() == 3;
}

void CurveSpec::validate() const {
  if (disc_core() == 0) throw std::invalid_argument("singular model: 4a4^3 + 27a6^2 = 0");
  if (conductor == 0) throw std::invalid_argument("conductor must be positive");
  if (!std::is_sorted(bad_primes.begin(), bad_primes.end())) {
    throw std::invalid_argument("bad_primes must be ascending");
  }
  for (const auto& pp : factorize(conductor).factors) {
    if (!is_bad(pp.prime)) {
      throw std::invalid_argument("conductor prime " + std::to_string(pp.prime) +
                                  " missing from bad_primes");
    }
  }
  for (u64 p : bad_primes) {
    if (!is_prime(p)) throw std::invalid_argument("bad_primes entry is not prime");
  }
  if (cm_disc && *cm_disc == 0) throw std::invalid_argument("cm_disc must be positive");
  if (b_e && *b_e == 0) throw std::invalid_argument("B_E must be positive");
  if (serre_primes) {
    for (u64 l : *serre_primes) {
      if (!is_prime(l)) throw std::invalid_argument("serre_primes entry is not prime");
    }
  }
}

ReducedCurve::ReducedCurve(u64 p, i64 a4, i64 a6)
    : ReducedCurve(PrimeField(p), FieldElement{}, FieldElement{}) {
  a4_ = field_.from_i64(a4);
  a6_ = field_.from_i64(a6);
  const i128 a4m = mod_i128(a4, p), a6m = mod_i128(a6, p);
  const i128 cube = a4m * a4m % p * a4m % p;
  const i128 core = (4 * cube + 27 * (a6m * a6m % p)) % p;
  if (core == 0) throw std::invalid_argument("curve is singular modulo p");
}

ReducedCurve::ReducedCurve(PrimeField field, FieldElement a4, FieldElement a6)
    : field_(std::move(field)), a4_(a4), a6_(a6) {}

FieldElement ReducedCurve::rhs(FieldElement x) const {
  const auto& F = field_;
  return F.add(F.mul(F.add(F.sqr(x), a4_), x), a6_);
}

bool ReducedCurve::on_curve(const CurvePoint& pt) const {
  return pt.infinity || field_.sqr(pt.y) == rhs(pt.x);
}

CurvePoint ReducedCurve::neg(const CurvePoint& a) const {
  if (a.infinity) return a;
  return CurvePoint::affine(a.x, field_.neg(a.y));
}

CurvePoint ReducedCurve::add(const CurvePoint& a, const CurvePoint& b) const {
  if (a.infinity) return b;
  if (b.infinity) return a;
  const auto& F = field_;
  if (a.x == b.x) {
    if (a.y == b.y) return dbl(a);
    return CurvePoint::at_infinity();
  }
  const FieldElement lambda = F.mul(F.sub(b.y, a.y), F.inv(F.sub(b.x, a.x)));
  const FieldElement x3 = F.sub(F.sub(F.sqr(lambda), a.x), b.x);
  const FieldElement y3 = F.sub(F.mul(lambda, F.sub(a.x, x3)), a.y);
  return CurvePoint::affine(x3, y3);
}

CurvePoint ReducedCurve::dbl(const CurvePoint& a) const {
  if (a.infinity || field_.is_zero(a.y)) return CurvePoint::at_infinity();
  const auto& F = field_;
  const FieldElement x2 = F.sqr(a.x);
  const FieldElement num = F.add(F.add(F.add(x2, x2), x2), a4_);
  const FieldElement lambda = F.mul(num, F.inv(F.add(a.y, a.y)));
  const FieldElement x3 = F.sub(F.sqr(lambda), F.add(a.x, a.x));
  const FieldElement y3 = F.sub(F.mul(lambda, F.sub(a.x, x3)), a.y);
  return CurvePoint::affine(x3, y3);
}

CurvePoint ReducedCurve::mul(u64 k, const CurvePoint& a) const {
  CurvePoint result = CurvePoint::at_infinity();
  if (k == 0 || a.infinity) return result;
  int top = 63;
  while (((k >> top) & 1) == 0) --top;
  for (int bit = top; bit >= 0; --bit) {
    result = dbl(result);
    if ((k >> bit) & 1) result = add(result, a);
  }
  return result;
}

CurvePoint ReducedCurve::random_point(std::mt19937_64& rng) const {
  std::uniform_int_distribution<u64> dist(0, p() - 1);
  for (;;) {
    const FieldElement x = field_.from_u64(dist(rng));
    FieldElement y;
    if (!field_.sqrt(rhs(x), y)) continue;
    if (rng() & 1) y = field_.neg(y);
    return CurvePoint::affine(x, y);
  }
}

ReducedCurve ReducedCurve::quadratic_twist() const {
  FieldElement d = field_.from_u64(2);
  while (field_.legendre(d) != -1) d = field_.add(d, field_.one());
  const FieldElement d2 = field_.sqr(d);
  return ReducedCurve(field_, field_.mul(a4_, d2), field_.mul(a6_, field_.mul(d2, d)));
}

std::optional<ReducedCurve> reduce_curve(const CurveSpec& spec, u64 p) {
  if (spec.is_bad(p)) return std::nullopt;
  return ReducedCurve(p, spec.a4, spec.a6);
}

int legendre(const PrimeField& field, FieldElement a) { return field.legendre(a); }

std::optional<FieldElement> sqrt_mod(const PrimeField& field, FieldElement a) {
  FieldElement r;
  if (!field.sqrt(a, r)) return std::nullopt;
  return r;
}

u64 hasse_width(u64 p) { return isqrt(4 * p); }

u64 point_count_naive(const ReducedCurve& curve) {
  const u64 p = curve.p();
  const PrimeField& F = curve.field();
  const u64 a4 = F.to_u64(curve.a4());
  const u64 a6 = F.to_u64(curve.a6());
  std::vector<std::uint8_t> square(p, 0);
  for (u64 y = 1; y < p; ++y) square[y * y % p] = 1;
  u64 n = 1;
  for (u64 x = 0; x < p; ++x) {
    const u64 f = ((x * x % p + a4) % p * x + a6) % p;
    if (f == 0) {
      n += 1;
    } else if (square[f]) {
      n += 2;
    }
  }
  const u64 lo = p + 1 - hasse_width(p), hi = p + 1 + hasse_width(p);
  if (n < lo || n > hi) throw KernelFault("point_count_naive: Hasse bound violated");
  return n;
}

u64 point_order(const ReducedCurve& curve, const CurvePoint& pt, u64 multiple) {
  if (pt.infinity) return 1;
  if (!curve.mul(multiple, pt).infinity) throw KernelFault("point_order: not a multiple");
  u64 order = multiple;
  for (const auto& pp : factorize(multiple).factors) {
    for (int i = 0; i < pp.exponent; ++i) {
      if (curve.mul(order / pp.prime, pt).infinity) {
        order /= pp.prime;
      } else {
        break;
      }
    }
  }
  return order;
}

namespace {

// Some N in [p+1-B, p+1+B] with N*P = O, reduced to the exact order of P.
u64 order_in_hasse_interval(const ReducedCurve& curve, const CurvePoint& pt) {
  const u64 p = curve.p();
  const u64 width = hasse_width(p);
  const u64 w = isqrt(width) + 1;
  struct Baby {
    u64 x;
    FieldElement y;
    u64 j;
  };
  std::vector<Baby> table;
  table.reserve(w);
  CurvePoint acc = CurvePoint::at_infinity();
  for (u64 j = 1; j <= w; ++j) {
    acc = curve.add(acc, pt);
    if (acc.infinity) return point_order(curve, pt, j);
    table.push_back({acc.x.mont, acc.y, j});
  }
  std::sort(table.begin(), table.end(), [](const Baby& a, const Baby& b) {
    return a.x < b.x || (a.x == b.x && a.j < b.j);
  });
  const u64 step = 2 * w + 1;
  const i64 k_max = static_cast<i64>(width / step) + 1;
  const CurvePoint giant = curve.mul(step, pt);
  const CurvePoint q = curve.mul(p + 1, pt);
  CurvePoint r = curve.add(q, curve.mul(static_cast<u64>(k_max), giant));
  const CurvePoint neg_giant = curve.neg(giant);
  for (i64 k = -k_max; k <= k_max; ++k, r = curve.add(r, neg_giant)) {
    i64 t = 0;
    if (!r.infinity) {
      auto it = std::lower_bound(table.begin(), table.end(), r.x.mont,
                                 [](const Baby& b, u64 x) { return b.x < x; });
      if (it == table.end() || it->x != r.x.mont) continue;
      t = it->y == r.y ? static_cast<i64>(it->j) : -static_cast<i64>(it->j);
    }
    const i64 a = k * static_cast<i64>(step) + t;
    const i64 n = static_cast<i64>(p) + 1 - a;
    if (n <= 0) continue;
    return point_order(curve, pt, static_cast<u64>(n));
  }
  throw KernelFault("BSGS: no order found in the Hasse interval");
}

}  // namespace

u64 point_count_bsgs(const ReducedCurve& curve, std::mt19937_64& rng) {
  const u64 p = curve.p();
  if (p <= 457) throw std::invalid_argument("point_count_bsgs requires p > 457");
  const u64 width = hasse_width(p);
  const u64 lo = p + 1 - width, hi = p + 1 + width;
  const ReducedCurve twist = curve.quadratic_twist();
  u64 l_curve = 1, l_twist = 1;
  for (int iter = 0; iter < 64; ++iter) {
    const bool on_twist = iter % 2 == 1;
    const ReducedCurve& c = on_twist ? twist : curve;
    const u64 ord = order_in_hasse_interval(c, c.random_point(rng));
    if (on_twist) {
      l_twist = lcm(l_twist, ord);
    } else {
      l_curve = lcm(l_curve, ord);
    }
    u64 found = 0, count = 0;
    for (u64 n = (lo + l_curve - 1) / l_curve * l_curve; n <= hi; n += l_curve) {
      if ((2 * p + 2 - n) % l_twist == 0) {
        found = n;
        if (++count > 1) break;
      }
    }
    if (count == 0) throw KernelFault("BSGS: no group order consistent with point orders");
    if (count == 1) return found;
  }
  throw KernelFault("BSGS: group order still ambiguous after 64 points");
}

u64 point_count(const ReducedCurve& curve, std::mt19937_64& rng, u64 crossover) {
  if (curve.p() < crossover || curve.p() <= 457) return point_count_naive(curve);
  return point_count_bsgs(curve, rng);
}

}  // namespace cycloscan
