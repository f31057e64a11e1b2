#include "cycloscan/constants.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace cycloscan {

namespace {

constexpr u64 kTailLimit = 1'000'000;
// sum over m > L of 1/phi(m)^2 is about 4.4/L; 5/L covers both tails.
constexpr double kTailBeyondLimit = 5.0 / static_cast<double>(kTailLimit);
// Smooth-support terms with |GL_2(Z/m)| beyond this are dropped (sum < 1e-15).
constexpr long double kSmoothDegreeCap = 1e20L;

struct TailTable {
  std::vector<double> sqfree;  // sqfree[M] = sum_{M < m <= L} mu^2/phi^2
  std::vector<double> all;
};

const TailTable& tail_table() {
  static TailTable table;
  static std::once_flag once;
  std::call_once(once, [] {
    const u64 L = kTailLimit;
    std::vector<u64> phi(L + 1);
    std::vector<std::uint8_t> sqfree(L + 1, 1);
    for (u64 i = 0; i <= L; ++i) phi[i] = i;
    for (u64 p = 2; p <= L; ++p) {
      if (phi[p] != p) continue;
      for (u64 k = p; k <= L; k += p) phi[k] -= phi[k] / p;
      for (u64 k = p * p; k <= L; k += p * p) sqfree[k] = 0;
    }
    table.sqfree.assign(L + 1, 0.0);
    table.all.assign(L + 1, 0.0);
    long double s = 0, a = 0;
    for (u64 m = L; m >= 1; --m) {
      table.sqfree[m] = static_cast<double>(s);
      table.all[m] = static_cast<double>(a);
      const long double t = 1.0L / (static_cast<long double>(phi[m]) * phi[m]);
      a += t;
      if (sqfree[m]) s += t;
    }
  });
  return table;
}

long double gl2_order_ld(u64 m) {
  long double r = 1;
  for (const auto& pp : factorize(m).factors) {
    const long double l = static_cast<long double>(pp.prime);
    const long double lk = std::pow(l, static_cast<long double>(pp.exponent));
    r *= lk * lk * lk * lk * (1 - 1 / l) * (1 - 1 / (l * l));
  }
  return r;
}

std::vector<u64> primes_up_to(u64 n) {
  std::vector<u64> out;
  for (u64 p = 2; p <= n; ++p) {
    if (is_prime(p)) out.push_back(p);
  }
  return out;
}

bool is_generic(const CurveSpec& curve, u64 m, bool assume_surjective) {
  if (m == 1) return true;
  if (curve.is_cm()) return false;
  return assume_surjective || gcd(m, curve.serre_constant()) == 1;
}

double exponent_weight(u64 m, ExponentForm form) {
  switch (form) {
    case ExponentForm::mobius_inverse:
      return divisor_pair_coefficient(m).to_double();
    case ExponentForm::divides_literal:
      return inner_mu_sum(m).to_double();
    case ExponentForm::printed:
      return mobius(m) * inner_mu_sum(m).to_double();
  }
  return 0;
}

}  // namespace

std::string to_string(DensityKind k) { return k == DensityKind::cyclicity ? "cyclicity" : "exponent"; }

std::string to_string(Backend b) {
  switch (b) {
    case Backend::exact_generic: return "exact_generic";
    case Backend::empirical: return "empirical";
    case Backend::hybrid: return "hybrid";
  }
  return "?";
}

std::string to_string(ExponentForm f) {
  switch (f) {
    case ExponentForm::mobius_inverse: return "mobius_inverse";
    case ExponentForm::divides_literal: return "divides_literal";
    case ExponentForm::printed: return "printed";
  }
  return "?";
}

DensityKind parse_kind(const std::string& s) {
  if (s == "cyclicity") return DensityKind::cyclicity;
  if (s == "exponent") return DensityKind::exponent;
  throw std::invalid_argument("unknown kind '" + s + "' (cyclicity, exponent)");
}

Backend parse_backend(const std::string& s) {
  if (s == "exact" || s == "exact_generic") return Backend::exact_generic;
  if (s == "empirical") return Backend::empirical;
  if (s == "hybrid") return Backend::hybrid;
  throw std::invalid_argument("unknown backend '" + s + "' (exact, empirical, hybrid)");
}

ExponentForm parse_exponent_form(const std::string& s) {
  if (s == "mobius_inverse") return ExponentForm::mobius_inverse;
  if (s == "divides_literal") return ExponentForm::divides_literal;
  if (s == "printed") return ExponentForm::printed;
  throw std::invalid_argument("unknown exponent form '" + s +
                              "' (mobius_inverse, divides_literal, printed)");
}

u64 gl2_order(u64 m) {
  if (m == 0) throw std::invalid_argument("gl2_order: m must be positive");
  u128 r = 1;
  for (const auto& pp : factorize(m).factors) {
    const u64 l = pp.prime;
    u128 lk = 1;
    for (int i = 0; i < pp.exponent; ++i) lk *= l;
    // l^(4k) (1 - 1/l)(1 - 1/l^2) = l^(4k-3) (l - 1)(l^2 - 1)
    u128 part = lk * lk * lk * lk / (l * l * l) * (l - 1) * (l * l - 1);
    if (part >> 64) throw std::overflow_error("gl2_order: exceeds 64 bits");
    r *= part;
    if (r >> 64) throw std::overflow_error("gl2_order: exceeds 64 bits");
  }
  return static_cast<u64>(r);
}

GenericDegree generic_degree(u64 m, u64 q, u64 a) {
  if (m == 0 || q == 0) throw std::invalid_argument("generic_degree: m and q must be positive");
  const u64 g = gcd(m, q);
  const u128 deg = static_cast<u128>(gl2_order(m)) * (euler_phi(q) / euler_phi(g));
  if (deg >> 64) throw std::overflow_error("generic_degree: exceeds 64 bits");
  return {static_cast<u64>(deg), (a % g) == (1 % g) ? 1 : 0};
}

GenericDegree generic_degree(const CurveSpec& curve, u64 m, u64 q, u64 a, bool assume_surjective) {
  if (!is_generic(curve, m, assume_surjective)) {
    throw GenericityError("m=" + std::to_string(m) +
                          " is outside the genericity window (shares a prime with A(E)=" +
                          std::to_string(curve.serre_constant()) + " or the curve has CM)");
  }
  return generic_degree(m, q, a);
}

HoldoutSample make_holdout(const std::vector<PrimeRecord>& records, u64 lo, u64 hi,
                           const Progression& prog) {
  if (hi <= lo) throw std::invalid_argument("holdout range is empty");
  prog.validate();
  HoldoutSample s;
  s.lo = lo;
  s.hi = hi;
  s.prog = prog;
  for (const auto& r : records) {
    if (r.p > lo && r.p <= hi && prog.contains(r.p)) s.records.push_back(r);
  }
  s.trials = PrimeSieve(hi).count(lo + 1, hi);
  return s;
}

EmpiricalDelta empirical_delta(const HoldoutSample& sample, u64 m) {
  if (m == 0) throw std::invalid_argument("empirical_delta: m must be positive");
  if (sample.trials < kMinHoldoutTrials) {
    throw std::invalid_argument("empirical_delta: holdout has " + std::to_string(sample.trials) +
                                " primes, need at least " + std::to_string(kMinHoldoutTrials));
  }
  EmpiricalDelta d;
  d.trials = sample.trials;
  for (const auto& r : sample.records) {
    if (r.dp % m == 0) ++d.hits;
  }
  const double n = static_cast<double>(d.trials);
  d.delta = static_cast<double>(d.hits) / n;
  d.stderr_ = std::sqrt(d.delta * (1 - d.delta) / n);
  return d;
}

double truncation_tail(u64 M, bool squarefree_only) {
  if (M >= kTailLimit) return kTailBeyondLimit;
  const auto& t = tail_table();
  return (squarefree_only ? t.sqfree[M] : t.all[M]) + kTailBeyondLimit;
}

double gl2_euler_product(u64 L) {
  long double prod = 1;
  for (u64 l : primes_up_to(L)) prod *= 1 - 1 / gl2_order_ld(l);
  return static_cast<double>(prod);
}

DensityEstimate density_constant(const CurveSpec& curve, const ConstantsOptions& opt) {
  if (opt.M < 1) throw std::invalid_argument("truncation M must be at least 1");
  opt.prog.validate();
  const bool cyclic = opt.kind == DensityKind::cyclicity;
  const u64 q = opt.prog.modulus;
  const u64 a = q == 1 ? 1 : opt.prog.residue % q;

  DensityEstimate est;
  est.kind = opt.kind;
  est.backend = opt.backend;
  est.form = opt.form;
  est.M = opt.M;
  est.q = q;
  est.a = a;

  if (opt.smooth_support && (!cyclic || opt.backend != Backend::exact_generic)) {
    throw std::invalid_argument("smooth support needs the exact backend and kind=cyclicity");
  }
  const bool closure = cyclic && opt.M >= 2 && curve.full_rational_two_torsion();
  if (opt.backend != Backend::exact_generic && opt.sample == nullptr) {
    throw std::invalid_argument("empirical backend needs a holdout dataset");
  }
  if (opt.sample && (opt.sample->prog.modulus != q || opt.sample->prog.residue % q != opt.prog.residue % q)) {
    throw std::invalid_argument("holdout progression differs from the requested (q, a)");
  }

  // Index set.
  std::vector<u64> index;
  if (closure) {
    for (u64 m = 1; m <= opt.M; m += 2) {
      if (mobius(m) == 0) continue;
      index.push_back(m);
      index.push_back(2 * m);
    }
  } else {
    for (u64 m = 1; m <= opt.M; ++m) {
      if (cyclic && mobius(m) == 0) continue;
      index.push_back(m);
    }
  }

  std::vector<u64> infeasible;
  for (u64 m : index) {
    const bool exact_ok = closure ? (m <= 2) : is_generic(curve, m, opt.assume_surjective);
    DensityTerm t;
    t.m = m;
    t.weight = cyclic ? mobius(m) : exponent_weight(m, opt.form);
    if (closure && m > 2) t.paired_with = (m % 2 == 1) ? 2 * m : m / 2;
    const bool use_exact =
        opt.backend == Backend::exact_generic || (opt.backend == Backend::hybrid && exact_ok);
    if (use_exact) {
      if (closure && m > 2) {
        // Q(E[2m]) = Q(E[m]) when E[2] is rational, so the pair cancels.
        est.terms.push_back(t);
        continue;
      }
      if (!exact_ok) {
        infeasible.push_back(m);
        continue;
      }
      if (closure && m == 2) {
        // delta_2 = delta_1: Q(E[2]) = Q.
        const GenericDegree g1 = generic_degree(1, q, a);
        t.gamma = g1.gamma;
        t.delta = 1.0 / static_cast<double>(g1.degree);
      } else {
        const GenericDegree g = generic_degree(m, q, a);
        t.gamma = g.gamma;
        t.delta = 1.0 / static_cast<double>(g.degree);
      }
    } else {
      const EmpiricalDelta d = empirical_delta(*opt.sample, m);
      t.gamma = 1;
      t.delta = d.delta;
      t.stderr_ = d.stderr_;
      t.empirical = true;
    }
    est.terms.push_back(t);
  }
  if (!infeasible.empty()) {
    std::string list;
    for (u64 m : infeasible) list += (list.empty() ? "" : ",") + std::to_string(m);
    throw GenericityError("exact backend infeasible for m in {" + list +
                          "}; use the hybrid or empirical backend");
  }

  long double value = 0;
  for (const auto& t : est.terms) {
    if (t.delta) value += static_cast<long double>(t.weight) * t.gamma * *t.delta;
  }

  if (opt.smooth_support) {
    // Squarefree m > M built from primes <= M, pruned once the degree is negligible.
    const std::vector<u64> primes = primes_up_to(opt.M);
    long double extra = 0;
    u64 count = 0;
    struct Frame {
      std::size_t next;
      u64 m;
      long double deg;
      int mu;
    };
    std::vector<Frame> stack{{0, 1, 1.0L, 1}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      for (std::size_t i = f.next; i < primes.size(); ++i) {
        const u64 l = primes[i];
        const long double dl = static_cast<long double>(l);
        const long double deg = f.deg * dl * (dl - 1) * (dl * dl - 1);
        if (deg > kSmoothDegreeCap) break;  // primes ascending: later ones are larger
        const u64 m = f.m * l;
        if (m > opt.M) {
          const u64 g = gcd(m, q);
          const long double full = deg * euler_phi(q) / euler_phi(g);
          const int gamma = (a % g) == (1 % g) ? 1 : 0;
          extra += -f.mu * gamma / full;
          ++count;
        }
        stack.push_back({i + 1, m, deg, -f.mu});
      }
    }
    value += extra;
    est.extra_terms = count;
  }
  est.value = static_cast<double>(value);

  if (closure) {
    est.truncation_bound = 0;
    est.note = "rational 2-torsion: odd m paired with 2m, pairs cancel exactly";
  } else {
    est.truncation_bound = truncation_tail(opt.M, cyclic);
  }
  est.truncation_constant = est.truncation_bound * static_cast<double>(opt.M);

  // Statistical error of the empirical part from per-prime contributions.
  if (opt.sample) {
    std::vector<const DensityTerm*> emp;
    for (const auto& t : est.terms) {
      if (t.empirical) emp.push_back(&t);
    }
    if (!emp.empty()) {
      long double s1 = 0, s2 = 0;
      for (const auto& r : opt.sample->records) {
        long double x = 0;
        for (const auto* t : emp) {
          if (r.dp % t->m == 0) x += t->weight;
        }
        s1 += x;
        s2 += x * x;
      }
      const long double n = static_cast<long double>(opt.sample->trials);
      const long double mean = s1 / n;
      const long double var = std::max(0.0L, s2 / n - mean * mean);
      est.statistical_error = static_cast<double>(std::sqrt(var / n));
    }
  }
  return est;
}

DensityEstimate c_constant(const CurveSpec& curve, ConstantsOptions options) {
  options.kind = DensityKind::cyclicity;
  return density_constant(curve, options);
}

DensityEstimate e_constant(const CurveSpec& curve, ConstantsOptions options) {
  options.kind = DensityKind::exponent;
  return density_constant(curve, options);
}

nlohmann::ordered_json estimate_to_json(const DensityEstimate& est) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = to_string(est.kind);
  j["value"] = est.value;
  j["M"] = est.M;
  j["backend"] = to_string(est.backend);
  j["q"] = est.q;
  j["a"] = est.a;
  if (est.kind == DensityKind::exponent) j["exponent_form"] = to_string(est.form);
  j["truncation_bound"] = est.truncation_bound;
  j["truncation_constant"] = est.truncation_constant;
  j["statistical_error"] = est.statistical_error;
  j["extra_terms"] = est.extra_terms;
  if (!est.note.empty()) j["note"] = est.note;
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& t : est.terms) {
    nlohmann::ordered_json jt;
    jt["m"] = t.m;
    jt["weight"] = t.weight;
    jt["gamma"] = t.gamma;
    jt["delta"] = t.delta ? nlohmann::ordered_json(*t.delta) : nlohmann::ordered_json(nullptr);
    jt["stderr"] = t.stderr_;
    jt["source"] = t.empirical ? "empirical" : "exact";
    if (t.paired_with) jt["paired_with"] = *t.paired_with;
    terms.push_back(jt);
  }
  j["terms"] = terms;
  return j;
}

DensityEstimate estimate_from_json(const nlohmann::json& j) {
  DensityEstimate est;
  est.kind = parse_kind(j.at("kind").get<std::string>());
  est.value = j.at("value").get<double>();
  est.M = j.at("M").get<u64>();
  est.backend = parse_backend(j.at("backend").get<std::string>());
  est.q = j.value("q", u64{1});
  est.a = j.value("a", u64{1});
  if (j.contains("exponent_form")) est.form = parse_exponent_form(j.at("exponent_form").get<std::string>());
  est.truncation_bound = j.at("truncation_bound").get<double>();
  est.truncation_constant = j.value("truncation_constant", 0.0);
  est.statistical_error = j.value("statistical_error", 0.0);
  est.extra_terms = j.value("extra_terms", u64{0});
  est.note = j.value("note", std::string{});
  for (const auto& jt : j.at("terms")) {
    DensityTerm t;
    t.m = jt.at("m").get<u64>();
    t.weight = jt.at("weight").get<double>();
    t.gamma = jt.at("gamma").get<double>();
    if (!jt.at("delta").is_null()) t.delta = jt.at("delta").get<double>();
    t.stderr_ = jt.value("stderr", 0.0);
    t.empirical = jt.value("source", std::string{"exact"}) == "empirical";
    if (jt.contains("paired_with")) t.paired_with = jt.at("paired_with").get<u64>();
    est.terms.push_back(t);
  }
  return est;
}

}  // namespace cycloscan
