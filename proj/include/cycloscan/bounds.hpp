// Error-envelope shapes and the auxiliary arithmetic they use. Implied
// constants are 1 throughout: the values are envelope shapes, not bounds.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cycloscan/constants.hpp"
#include "cycloscan/scan.hpp"

namespace cycloscan {

struct BoundsInput {
  double x = 16;
  u64 q = 1;
  u64 a = 1;
  u64 n_e = 1;
  std::optional<u64> D;
  u64 m_e = 30;
  u64 a_e = 30;
  std::optional<u64> b_e;
  std::optional<double> S;

  /// Throws std::invalid_argument unless x >= 16, q >= 1, m_e squarefree.
  void validate() const;
  static BoundsInput from_curve(const CurveSpec& curve, double x, u64 q, u64 a);
};

struct QSplit {
  u64 q1 = 1;
  u64 q2 = 1;
  friend bool operator==(const QSplit&, const QSplit&) = default;
};

/// q2 = largest divisor of q coprime to m_e, q1 = q / q2.
QSplit q_split(u64 q, u64 m_e);

/// sum over d | m_e of phi(gcd(d, q1)) d^3 / phi(d); m_e squarefree.
double R_E_q1(u64 m_e, u64 q1);

/// c in {2, 49} from D mod 4 and the parity of q.
int G_D_constant(u64 D, u64 q);
/// c 4^omega(q) tau_2(q) q^2.
double G_D_bound(u64 D, u64 q);

struct SESum {
  double partial = 0;  // d | m_e^infinity, d <= d_cap
  double tail = 0;     // closed form minus partial
  double total = 0;
};

/// sum over d | m_e^infinity of B_E / (d phi(d)).
SESum S_E(u64 m_e, u64 b_e, u64 d_cap = 1'000'000);

double envelope_cm_grh(const BoundsInput& in);
double envelope_noncm_grh(const BoundsInput& in);
/// Four-term CM envelope with G_D replaced by G_D_bound. Needs D.
double envelope_ag_cm(const BoundsInput& in);
/// Four-term non-CM envelope with m_e^3 replaced by R_{E,q1}.
double envelope_ag_noncm(const BoundsInput& in);

enum class ExpVariant { cm_1, cm_2, noncm_1, noncm_2 };
/// x times the exponent error shape. noncm_2 needs B_E, cm_2 needs D.
double envelope_exp(const BoundsInput& in, ExpVariant variant, u64 d_cap = 1'000'000);

struct SiegelEnvelope {
  double exponent = 0;             // 1 / (2S + 4)
  double value = 0;                // x exp(-(log x)^exponent), c_1 = 1
  double uniformity_boundary = 0;  // exp((log x)^exponent / 2), kappa = 1
};
/// Needs S >= -1.
SiegelEnvelope envelope_siegel(const BoundsInput& in);

enum class Envelope {
  cm_grh,
  noncm_grh,
  ag_cm,
  ag_noncm,
  exp_cm_1,
  exp_cm_2,
  exp_noncm_1,
  exp_noncm_2,
  siegel_c,
  siegel_e
};
std::string to_string(Envelope e);
Envelope parse_envelope(const std::string& s);
const std::vector<Envelope>& all_envelopes();
/// Envelope for pi_c (or pi_e for the exp_ and siegel_e kinds) at in.x.
double evaluate_envelope(Envelope e, const BoundsInput& in, u64 d_cap = 1'000'000);
bool envelope_is_exponent(Envelope e);

struct ResidualRow {
  u64 x = 0;
  double observed = 0;
  double main_term = 0;
  double residual = 0;
  double envelope = 0;
  double ratio = 0;  // |residual| / envelope
};

struct EnvelopeReport {
  std::vector<ResidualRow> rows;
  std::optional<double> slope_fit;  // empty when every residual is 0
  std::string slope_note;
};

/// Least-squares slope of log|y| against log x over points with y != 0.
std::optional<double> slope_fit(const std::vector<double>& xs, const std::vector<double>& ys);

/// Residuals pi_c - c Li(x) (or pi_e - e Li(x^2)) at snapshots with
/// x >= x_min, with envelope ratios and the slope fit. Needs >= 4 rows.
EnvelopeReport residual_report(const std::vector<Accumulator>& snapshots,
                               const DensityEstimate& constant,
                               const std::function<double(double)>& envelope, u64 x_min = 16);

}  // namespace cycloscan
