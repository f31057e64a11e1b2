// Truncated density constants for cyclicity and exponents, from closed-form
// generic degrees or from per-m densities measured on a holdout range.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cycloscan/curve.hpp"
#include "cycloscan/structure.hpp"
#include "json.hpp"

namespace cycloscan {

enum class DensityKind { cyclicity, exponent };
enum class Backend { exact_generic, empirical, hybrid };

/// Coefficient attached to m in the exponent constant.
///  mobius_inverse: sum over de = m of mu(d)/e (sums to 1/n over m | n)
///  divides_literal: sum over de | m of mu(d)/e, which is 1/m
///  printed: mu(m) times the divides_literal coefficient
enum class ExponentForm { mobius_inverse, divides_literal, printed };

std::string to_string(DensityKind k);
std::string to_string(Backend b);
std::string to_string(ExponentForm f);
DensityKind parse_kind(const std::string& s);
Backend parse_backend(const std::string& s);
ExponentForm parse_exponent_form(const std::string& s);

class GenericityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// |GL_2(Z/mZ)|; throws std::overflow_error past 64 bits.
u64 gl2_order(u64 m);

struct GenericDegree {
  u64 degree = 1;
  int gamma = 1;
  friend bool operator==(const GenericDegree&, const GenericDegree&) = default;
};

/// [Q(E[m]) Q(zeta_q) : Q] when the mod-m image is all of GL_2 and the
/// intersection with Q(zeta_q) is Q(zeta_gcd(m,q)); gamma = [a = 1 mod gcd].
GenericDegree generic_degree(u64 m, u64 q, u64 a);
/// Same, after checking that m is coprime to A(E) (skipped when
/// assume_surjective). Throws GenericityError otherwise.
GenericDegree generic_degree(const CurveSpec& curve, u64 m, u64 q, u64 a, bool assume_surjective);

/// Records restricted to a holdout range (lo, hi] and a progression, with
/// the count of all primes in the range as the trial count.
struct HoldoutSample {
  u64 lo = 0;
  u64 hi = 0;
  Progression prog;
  std::vector<PrimeRecord> records;
  u64 trials = 0;
};

HoldoutSample make_holdout(const std::vector<PrimeRecord>& records, u64 lo, u64 hi,
                           const Progression& prog);

struct EmpiricalDelta {
  double delta = 0;
  double stderr_ = 0;
  u64 hits = 0;
  u64 trials = 0;
};

inline constexpr u64 kMinHoldoutTrials = 1000;

/// delta_m = #{p in holdout : m | d_p} / pi(holdout) with binomial standard
/// error. Throws std::invalid_argument below kMinHoldoutTrials primes.
EmpiricalDelta empirical_delta(const HoldoutSample& sample, u64 m);

struct DensityTerm {
  u64 m = 1;
  double weight = 1;            // mu(m) or the exponent coefficient
  double gamma = 1;             // 0/1 for exact terms; 1 when absorbed into delta
  std::optional<double> delta;  // empty for pairs cancelled by rational 2-torsion
  double stderr_ = 0;
  bool empirical = false;
  std::optional<u64> paired_with;
};

struct DensityEstimate {
  DensityKind kind = DensityKind::cyclicity;
  Backend backend = Backend::exact_generic;
  ExponentForm form = ExponentForm::mobius_inverse;
  u64 M = 1;
  u64 q = 1;
  u64 a = 1;
  double value = 0;
  std::vector<DensityTerm> terms;
  u64 extra_terms = 0;  // smooth-support terms with m > M, summed but not listed
  double truncation_bound = 0;
  double truncation_constant = 0;  // truncation_bound * M
  double statistical_error = 0;
  std::string note;
};

struct ConstantsOptions {
  DensityKind kind = DensityKind::cyclicity;
  Backend backend = Backend::exact_generic;
  u64 M = 50;
  Progression prog;
  ExponentForm form = ExponentForm::mobius_inverse;
  bool assume_surjective = false;
  /// Cyclicity, exact backend only: sum over squarefree m whose prime factors
  /// are all <= M (the Euler-product index set) instead of m <= M.
  bool smooth_support = false;
  const HoldoutSample* sample = nullptr;  // required unless purely exact
};

/// Shared driver; c_constant and e_constant fix the kind.
DensityEstimate density_constant(const CurveSpec& curve, const ConstantsOptions& options);
DensityEstimate c_constant(const CurveSpec& curve, ConstantsOptions options);
DensityEstimate e_constant(const CurveSpec& curve, ConstantsOptions options);

/// sum over m > M of mu(m)^2/phi(m)^2 (squarefree_only) or 1/phi(m)^2.
double truncation_tail(u64 M, bool squarefree_only);

/// prod over primes l <= L of (1 - 1/|GL_2(F_l)|).
double gl2_euler_product(u64 L);

nlohmann::ordered_json estimate_to_json(const DensityEstimate& est);
DensityEstimate estimate_from_json(const nlohmann::json& j);

}  // namespace cycloscan
