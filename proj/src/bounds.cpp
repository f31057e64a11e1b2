#include "cycloscan/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace cycloscan {

namespace {

double log_qnx(const BoundsInput& in) {
  return std::log(static_cast<double>(in.q) * static_cast<double>(in.n_e) * in.x);
}

u64 require_D(const BoundsInput& in) {
  if (!in.D) throw std::invalid_argument("envelope needs the CM discriminant D");
  return *in.D;
}

}  // namespace

void BoundsInput::validate() const {
  if (!(x >= 16)) throw std::invalid_argument("bounds: x must be at least 16");
  if (q < 1) throw std::invalid_argument("bounds: q must be positive");
  if (n_e < 1) throw std::invalid_argument("bounds: n_e must be positive");
  if (m_e < 1 || !factorize(m_e).squarefree()) {
    throw std::invalid_argument("bounds: m_e must be squarefree");
  }
  if (D && *D < 1) throw std::invalid_argument("bounds: D must be positive");
  if (S && *S < -1) throw std::invalid_argument("bounds: S must be at least -1");
}

BoundsInput BoundsInput::from_curve(const CurveSpec& curve, double x, u64 q, u64 a) {
  BoundsInput in;
  in.x = x;
  in.q = q;
  in.a = a;
  in.n_e = curve.conductor;
  in.D = curve.cm_disc;
  in.m_e = curve.radical_a_n();
  in.a_e = curve.serre_constant();
  in.b_e = curve.b_e;
  return in;
}

QSplit q_split(u64 q, u64 m_e) {
  if (q == 0 || m_e == 0) throw std::invalid_argument("q_split: inputs must be positive");
  u64 q2 = q;
  for (const auto& pp : factorize(m_e).factors) {
    while (q2 % pp.prime == 0) q2 /= pp.prime;
  }
  return {q / q2, q2};
}

double R_E_q1(u64 m_e, u64 q1) {
  const Factorization f = factorize(m_e);
  if (!f.squarefree()) throw std::invalid_argument("R_E_q1: m_e must be squarefree");
  Rational sum;
  for (u64 d : divisors(f)) {
    const i128 num = static_cast<i128>(euler_phi(gcd(d, q1))) * d * d * d;
    sum += Rational(num, static_cast<i128>(euler_phi(d)));
  }
  return sum.to_double();
}

int G_D_constant(u64 D, u64 q) {
  if (D < 1) throw std::invalid_argument("G_D: D must be positive");
  const u64 r = D % 4;
  if (r == 1 || r == 2) return 2;
  if (r == 3 && q % 2 == 1) return 2;
  return 49;
}

double G_D_bound(u64 D, u64 q) {
  const double qd = static_cast<double>(q);
  return G_D_constant(D, q) * std::pow(4.0, omega(q)) * static_cast<double>(tau2(q)) * qd * qd;
}

SESum S_E(u64 m_e, u64 b_e, u64 d_cap) {
  const Factorization f = factorize(m_e);
  if (m_e < 1 || !f.squarefree()) throw std::invalid_argument("S_E: m_e must be squarefree");
  // Enumerate d | m_e^infinity up to d_cap.
  std::vector<u64> ds{1};
  for (const auto& pp : f.factors) {
    const std::size_t base = ds.size();
    for (std::size_t i = 0; i < base; ++i) {
      u64 d = ds[i];
      while (d <= d_cap / pp.prime) {
        d *= pp.prime;
        ds.push_back(d);
      }
    }
  }
  long double partial = 0;
  for (u64 d : ds) partial += 1.0L / (static_cast<long double>(d) * euler_phi(d));
  long double closed = 1;
  for (const auto& pp : f.factors) {
    const long double l = static_cast<long double>(pp.prime);
    closed *= 1 + l / ((l - 1) * (l * l - 1));
  }
  SESum s;
  s.partial = static_cast<double>(b_e * partial);
  s.total = static_cast<double>(b_e * closed);
  s.tail = static_cast<double>(b_e * (closed - partial));
  return s;
}

double envelope_cm_grh(const BoundsInput& in) {
  in.validate();
  const double lx = std::log(in.x);
  return std::pow(in.x, 0.75) * std::sqrt(log_qnx(in) / lx) +
         std::pow(in.x, 0.25) * std::log(static_cast<double>(in.n_e));
}

double envelope_noncm_grh(const BoundsInput& in) {
  in.validate();
  const double lx = std::log(in.x);
  const double L = log_qnx(in);
  const QSplit s = q_split(in.q, in.m_e);
  return std::pow(in.x, 5.0 / 6) * std::pow(L, 2.0 / 3) / std::cbrt(lx) +
         static_cast<double>(tau2(s.q2)) * L / static_cast<double>(euler_phi(in.q)) *
             R_E_q1(in.m_e, s.q1);
}

double envelope_ag_cm(const BoundsInput& in) {
  in.validate();
  const double G = G_D_bound(require_D(in), in.q);
  const double q = static_cast<double>(in.q);
  const double lx = std::log(in.x);
  const double L = log_qnx(in);
  return std::pow(in.x, 0.75) * std::sqrt(L * G / (q * q * q)) +
         std::pow(in.x, 0.75) * std::sqrt(L / lx) + std::sqrt(in.x) * q * L +
         std::sqrt(in.x) * (1 / q + lx / (q * q)) * G;
}

double envelope_ag_noncm(const BoundsInput& in) {
  in.validate();
  const double q = static_cast<double>(in.q);
  const double lx = std::log(in.x);
  const double L = log_qnx(in);
  const QSplit s = q_split(in.q, in.m_e);
  const double R = R_E_q1(in.m_e, s.q1);
  const double t2 = static_cast<double>(tau2(s.q2));
  const double phiq = static_cast<double>(euler_phi(in.q));
  return std::pow(in.x, 5.0 / 6) * std::cbrt(static_cast<double>(big_H(in.q)) * L * L / q) +
         std::pow(in.x, 5.0 / 8) * std::pow(t2 * L * L * L / (phiq * lx) * R, 0.25) +
         std::sqrt(in.x) * q * L + t2 / (phiq * std::sqrt(in.x) * lx) * R;
}

double envelope_exp(const BoundsInput& in, ExpVariant variant, u64 d_cap) {
  in.validate();
  const double q = static_cast<double>(in.q);
  const double lx = std::log(in.x);
  const double L = log_qnx(in);
  double e = 0;
  switch (variant) {
    case ExpVariant::cm_1:
      e = envelope_cm_grh(in);
      break;
    case ExpVariant::cm_2:
      e = envelope_ag_cm(in);
      break;
    case ExpVariant::noncm_1:
      e = std::pow(in.x, 5.0 / 6) * std::pow(L, 2.0 / 3) / std::cbrt(lx) + std::sqrt(in.x) / q;
      break;
    case ExpVariant::noncm_2: {
      if (!in.b_e) throw std::invalid_argument("envelope exp_noncm_2 needs B_E");
      const double se = S_E(in.m_e, *in.b_e, d_cap).total;
      const QSplit s = q_split(in.q, in.m_e);
      const double t2 = static_cast<double>(tau2(s.q2));
      const double phi2 = static_cast<double>(euler_phi(s.q2));
      e = std::pow(in.x, 5.0 / 6) * std::cbrt(static_cast<double>(big_H(in.q)) * L * L / q) +
          std::pow(in.x, 5.0 / 8) * std::pow(t2 * L * L * L / (phi2 * lx) * se, 0.25) +
          std::sqrt(in.x) * q * L + t2 / (phi2 * std::sqrt(in.x) * lx) * se;
      break;
    }
  }
  return in.x * e;
}

SiegelEnvelope envelope_siegel(const BoundsInput& in) {
  in.validate();
  if (!in.S) throw std::invalid_argument("envelope siegel needs S");
  SiegelEnvelope s;
  s.exponent = 1.0 / (2 * *in.S + 4);
  const double t = std::pow(std::log(in.x), s.exponent);
  s.value = in.x * std::exp(-t);
  s.uniformity_boundary = std::exp(t / 2);
  return s;
}

std::string to_string(Envelope e) {
  switch (e) {
    case Envelope::cm_grh: return "cm_grh";
    case Envelope::noncm_grh: return "noncm_grh";
    case Envelope::ag_cm: return "ag_cm";
    case Envelope::ag_noncm: return "ag_noncm";
    case Envelope::exp_cm_1: return "exp_cm_1";
    case Envelope::exp_cm_2: return "exp_cm_2";
    case Envelope::exp_noncm_1: return "exp_noncm_1";
    case Envelope::exp_noncm_2: return "exp_noncm_2";
    case Envelope::siegel_c: return "siegel_c";
    case Envelope::siegel_e: return "siegel_e";
  }
  return "?";
}

const std::vector<Envelope>& all_envelopes() {
  static const std::vector<Envelope> all{
      Envelope::cm_grh,   Envelope::noncm_grh,   Envelope::ag_cm,       Envelope::ag_noncm,
      Envelope::exp_cm_1, Envelope::exp_cm_2,    Envelope::exp_noncm_1, Envelope::exp_noncm_2,
      Envelope::siegel_c, Envelope::siegel_e};
  return all;
}

Envelope parse_envelope(const std::string& s) {
  for (Envelope e : all_envelopes()) {
    if (to_string(e) == s) return e;
  }
  throw std::invalid_argument("unknown envelope '" + s + "'");
}

bool envelope_is_exponent(Envelope e) {
  switch (e) {
    case Envelope::exp_cm_1:
    case Envelope::exp_cm_2:
    case Envelope::exp_noncm_1:
    case Envelope::exp_noncm_2:
    case Envelope::siegel_e:
      return true;
    default:
      return false;
  }
}

double evaluate_envelope(Envelope e, const BoundsInput& in, u64 d_cap) {
  switch (e) {
    case Envelope::cm_grh: return envelope_cm_grh(in);
    case Envelope::noncm_grh: return envelope_noncm_grh(in);
    case Envelope::ag_cm: return envelope_ag_cm(in);
    case Envelope::ag_noncm: return envelope_ag_noncm(in);
    case Envelope::exp_cm_1: return envelope_exp(in, ExpVariant::cm_1, d_cap);
    case Envelope::exp_cm_2: return envelope_exp(in, ExpVariant::cm_2, d_cap);
    case Envelope::exp_noncm_1: return envelope_exp(in, ExpVariant::noncm_1, d_cap);
    case Envelope::exp_noncm_2: return envelope_exp(in, ExpVariant::noncm_2, d_cap);
    case Envelope::siegel_c: return envelope_siegel(in).value;
    case Envelope::siegel_e: return in.x * envelope_siegel(in).value;
  }
  return 0;
}

std::optional<double> slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("slope_fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] == 0 || xs[i] <= 0) continue;
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(std::fabs(ys[i])));
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

EnvelopeReport residual_report(const std::vector<Accumulator>& snapshots,
                               const DensityEstimate& constant,
                               const std::function<double(double)>& envelope, u64 x_min) {
  const bool exponent = constant.kind == DensityKind::exponent;
  EnvelopeReport rep;
  std::vector<double> xs, res;
  for (const auto& s : snapshots) {
    if (s.x < std::max<u64>(x_min, 16)) continue;
    ResidualRow row;
    row.x = s.x;
    const double x = static_cast<double>(s.x);
    row.observed = exponent ? static_cast<double>(s.exponent_sum) : static_cast<double>(s.cyclic_count);
    row.main_term = constant.value * (exponent ? log_integral(x * x) : log_integral(x));
    row.residual = row.observed - row.main_term;
    row.envelope = envelope(x);
    if (!(row.envelope > 0)) throw std::domain_error("envelope must be positive");
    row.ratio = std::fabs(row.residual) / row.envelope;
    rep.rows.push_back(row);
    xs.push_back(x);
    res.push_back(row.residual);
  }
  if (rep.rows.size() < 4) {
    throw std::invalid_argument("residual_report needs at least 4 checkpoints, got " +
                                std::to_string(rep.rows.size()));
  }
  rep.slope_fit = slope_fit(xs, res);
  if (!rep.slope_fit) rep.slope_note = "undefined: residual is identically zero";
  return rep;
}

}  // namespace cycloscan
