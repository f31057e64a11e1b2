#include "cycloscan/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace cycloscan {

int PolyRing::degree(const Poly& a) const {
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
    if (!f_.is_zero(a[static_cast<std::size_t>(i)])) return i;
  }
  return -1;
}

void PolyRing::trim(Poly& a) const {
  while (!a.empty() && f_.is_zero(a.back())) a.pop_back();
}

Poly PolyRing::add(const Poly& a, const Poly& b) const {
  Poly r(std::max(a.size(), b.size()), f_.zero());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = f_.add(r[i], b[i]);
  trim(r);
  return r;
}

Poly PolyRing::sub(const Poly& a, const Poly& b) const {
  Poly r(std::max(a.size(), b.size()), f_.zero());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = f_.sub(r[i], b[i]);
  trim(r);
  return r;
}

Poly PolyRing::mul(const Poly& a, const Poly& b) const {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, f_.zero());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (f_.is_zero(a[i])) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = f_.add(r[i + j], f_.mul(a[i], b[j]));
  }
  trim(r);
  return r;
}

Poly PolyRing::scale(const Poly& a, FieldElement c) const {
  Poly r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f_.mul(a[i], c);
  trim(r);
  return r;
}

Poly PolyRing::mod(const Poly& a, const Poly& m) const {
  const int dm = degree(m);
  if (dm < 0) throw std::domain_error("polynomial division by zero");
  Poly r = a;
  trim(r);
  const FieldElement lead_inv = f_.inv(m[static_cast<std::size_t>(dm)]);
  for (int dr = degree(r); dr >= dm; dr = degree(r)) {
    const FieldElement c = f_.mul(r[static_cast<std::size_t>(dr)], lead_inv);
    const int shift = dr - dm;
    for (int i = 0; i <= dm; ++i) {
      auto& slot = r[static_cast<std::size_t>(i + shift)];
      slot = f_.sub(slot, f_.mul(c, m[static_cast<std::size_t>(i)]));
    }
    trim(r);
  }
  return r;
}

Poly PolyRing::monic(const Poly& a) const {
  const int d = degree(a);
  if (d < 0) return {};
  return scale(a, f_.inv(a[static_cast<std::size_t>(d)]));
}

Poly PolyRing::gcd(Poly a, Poly b) const {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

Poly PolyRing::powmod(const Poly& base, u64 e, const Poly& m) const {
  Poly result{f_.one()};
  result = mod(result, m);
  Poly b = mod(base, m);
  while (e) {
    if (e & 1) result = mod(mul(result, b), m);
    b = mod(mul(b, b), m);
    e >>= 1;
  }
  return result;
}

FieldElement PolyRing::eval(const Poly& a, FieldElement x) const {
  FieldElement r = f_.zero();
  for (auto it = a.rbegin(); it != a.rend(); ++it) r = f_.add(f_.mul(r, x), *it);
  return r;
}

void PolyRing::split(const Poly& g, std::mt19937_64& rng, std::vector<FieldElement>& out) const {
  const int d = degree(g);
  if (d <= 0) return;
  if (d == 1) {
    // g monic: x + c
    out.push_back(f_.neg(g[0]));
    return;
  }
  const u64 p = f_.modulus();
  std::uniform_int_distribution<u64> dist(0, p - 1);
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Poly shifted{f_.from_u64(dist(rng)), f_.one()};
    Poly h = powmod(shifted, (p - 1) / 2, g);
    h = sub(h, Poly{f_.one()});
    Poly factor = gcd(g, h);
    const int df = degree(factor);
    if (df > 0 && df < d) {
      split(factor, rng, out);
      // exact division by repeated reduction: g = factor * q
      Poly q;
      {
        Poly r = g;
        q.assign(static_cast<std::size_t>(d - df + 1), f_.zero());
        for (int dr = degree(r); dr >= df; dr = degree(r)) {
          const FieldElement c = r[static_cast<std::size_t>(dr)];
          q[static_cast<std::size_t>(dr - df)] = c;
          for (int i = 0; i <= df; ++i) {
            auto& slot = r[static_cast<std::size_t>(i + dr - df)];
            slot = f_.sub(slot, f_.mul(c, factor[static_cast<std::size_t>(i)]));
          }
          trim(r);
        }
        trim(q);
      }
      split(monic(q), rng, out);
      return;
    }
  }
  throw std::runtime_error("root splitting failed to make progress");
}

std::vector<FieldElement> PolyRing::roots(const Poly& a, std::mt19937_64& rng) const {
  if (degree(a) < 0) throw std::domain_error("roots of the zero polynomial");
  const Poly m = monic(a);
  if (degree(m) == 0) return {};
  const Poly x{f_.zero(), f_.one()};
  Poly xp = powmod(x, f_.modulus(), m);
  Poly g = gcd(m, sub(xp, x));
  std::vector<FieldElement> out;
  split(g, rng, out);
  std::sort(out.begin(), out.end(), [&](FieldElement u, FieldElement v) {
    return f_.to_u64(u) < f_.to_u64(v);
  });
  return out;
}

Poly odd_division_polynomial(const PolyRing& ring, FieldElement a4, FieldElement a6, unsigned l) {
  if (l % 2 == 0) throw std::invalid_argument("odd_division_polynomial: l must be odd");
  const PrimeField& F = ring.field();
  auto c = [&](i64 v) { return F.from_i64(v); };
  // psi_n = F_n for odd n and y * F_n for even n.
  const Poly cubic{a6, a4, F.zero(), F.one()};
  const Poly cubic2 = ring.mul(cubic, cubic);
  const FieldElement a4sq = F.sqr(a4);
  std::vector<Poly> fn(std::max<unsigned>(l + 1, 5));
  fn[0] = {};
  fn[1] = {F.one()};
  fn[2] = {c(2)};
  fn[3] = {F.neg(a4sq), F.mul(c(12), a6), F.mul(c(6), a4), F.zero(), c(3)};
  {
    const FieldElement a4cube = F.mul(a4sq, a4);
    Poly inner{F.sub(F.neg(F.mul(c(8), F.sqr(a6))), a4cube),
               F.neg(F.mul(c(4), F.mul(a4, a6))),
               F.neg(F.mul(c(5), a4sq)),
               F.mul(c(20), a6),
               F.mul(c(5), a4),
               F.zero(),
               F.one()};
    fn[4] = ring.scale(inner, c(4));
  }
  const FieldElement half = F.inv(c(2));
  for (unsigned n = 5; n <= l; ++n) {
    const unsigned m = n / 2;
    if (n % 2 == 1) {
      Poly t1 = ring.mul(fn[m + 2], ring.mul(fn[m], ring.mul(fn[m], fn[m])));
      Poly t2 = ring.mul(fn[m - 1], ring.mul(fn[m + 1], ring.mul(fn[m + 1], fn[m + 1])));
      if (m % 2 == 0) {
        t1 = ring.mul(t1, cubic2);
      } else {
        t2 = ring.mul(t2, cubic2);
      }
      fn[n] = ring.sub(t1, t2);
    } else {
      Poly t1 = ring.mul(fn[m + 2], ring.mul(fn[m - 1], fn[m - 1]));
      Poly t2 = ring.mul(fn[m - 2], ring.mul(fn[m + 1], fn[m + 1]));
      fn[n] = ring.scale(ring.mul(fn[m], ring.sub(t1, t2)), half);
    }
  }
  return fn[l];
}

}  // namespace cycloscan
