#include "cycloscan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace cycloscan {

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"curve",
     {"label", "a4", "a6", "conductor", "bad_primes", "cm_disc", "serre_primes", "b_e",
      "assume_surjective"}},
    {"scan", {"x_max", "q", "a", "checkpoints", "m_max", "shards", "seed", "crossover"}},
    {"constants",
     {"backend", "kind", "truncation", "exponent_form", "smooth_support", "holdout"}},
    {"bounds", {"x_grid", "d_cap", "s", "envelopes"}},
    {"verify", {"x", "oracle_limit"}},
    {"output", {"dir"}},
};

struct Entry {
  std::string value;
  std::size_t line;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(',');
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

i64 parse_i64(std::string_view s) {
  i64 v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

class Sections {
 public:
  Sections(std::string_view text, std::string source) : source_(std::move(source)) {
    std::string section;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
      ++lineno;
      std::string_view line(raw);
      const auto hash = line.find_first_of("#;");
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(source_, lineno, "unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!kSchema.count(section)) {
          throw ConfigError(source_, lineno, "unknown section [" + section + "]");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(source_, lineno, "expected key = value");
      if (section.empty()) throw ConfigError(source_, lineno, "assignment outside a section");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (!kSchema.at(section).count(key)) {
        throw ConfigError(source_, lineno, "unknown key '" + key + "' in [" + section + "]");
      }
      if (value.empty()) throw ConfigError(source_, lineno, "empty value for '" + key + "'");
      const std::string full = section + "." + key;
      if (entries_.count(full)) {
        throw ConfigError(source_, lineno,
                          "duplicate key '" + key + "' (first set on line " +
                              std::to_string(entries_.at(full).line) + ")");
      }
      entries_[full] = {value, lineno};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  // Applies fn to the value; conversion errors are reported at the key's line.
  template <class Fn>
  auto get(const std::string& key, Fn fn) const {
    const Entry& e = entries_.at(key);
    try {
      return fn(e.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError(source_, e.line, key + ": " + ex.what());
    }
  }

  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    if (has(key)) throw ConfigError(source_, entries_.at(key).line, key + ": " + what);
    throw ConfigError(source_ + ": " + what);
  }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what) {}

u64 parse_u64(std::string_view s) {
  std::string clean;
  for (char c : s) {
    if (c != '_') clean += c;
  }
  auto parse_plain = [](std::string_view t) {
    u64 v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw std::invalid_argument("expected a non-negative integer, got '" + std::string(t) + "'");
    }
    return v;
  };
  auto power = [&](u64 base, u64 exp) {
    u128 v = base;
    for (u64 i = 0; i < exp; ++i) {
      v *= 10;
      if (v >> 63) throw std::invalid_argument("integer '" + clean + "' too large");
    }
    return static_cast<u64>(v);
  };
  if (const auto pos = clean.find("10^"); pos == 0) {
    return power(1, parse_plain(std::string_view(clean).substr(3)));
  }
  if (const auto pos = clean.find_first_of("eE"); pos != std::string::npos) {
    return power(parse_plain(std::string_view(clean).substr(0, pos)),
                 parse_plain(std::string_view(clean).substr(pos + 1)));
  }
  return parse_plain(clean);
}

std::vector<u64> parse_u64_list(std::string_view s) {
  std::vector<u64> out;
  for (auto item : split_list(s)) out.push_back(parse_u64(item));
  return out;
}

Backend JobConfig::effective_backend() const {
  if (backend) return *backend;
  return scan.curve.is_cm() ? Backend::empirical : Backend::exact_generic;
}

u64 JobConfig::effective_truncation() const {
  if (truncation) return *truncation;
  return effective_backend() == Backend::exact_generic ? 50 : 30;
}

std::pair<u64, u64> JobConfig::effective_holdout() const {
  if (holdout) return *holdout;
  return {scan.x_max / 2, scan.x_max};
}

ConstantsOptions JobConfig::constants_options(const HoldoutSample* sample) const {
  ConstantsOptions o;
  o.kind = kind;
  o.backend = effective_backend();
  o.M = effective_truncation();
  o.prog = scan.prog;
  o.form = exponent_form;
  o.assume_surjective = assume_surjective;
  o.smooth_support = smooth_support;
  o.sample = sample;
  return o;
}

void JobConfig::validate() const {
  try {
    scan.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scan configuration: ") + e.what());
  }
  if (holdout && (holdout->first >= holdout->second || holdout->second > scan.x_max)) {
    throw ConfigError("holdout must satisfy lo < hi <= x_max");
  }
  if (truncation && *truncation < 1) throw ConfigError("truncation must be at least 1");
  if (d_cap < 1) throw ConfigError("d_cap must be at least 1");
  for (double x : x_grid) {
    if (!(x >= 16)) throw ConfigError("x_grid values must be at least 16");
  }
  for (Envelope e : envelopes) {
    if ((e == Envelope::siegel_c || e == Envelope::siegel_e) && !s) {
      throw ConfigError("envelope " + to_string(e) + " needs [bounds] s");
    }
    if (e == Envelope::exp_noncm_2 && !scan.curve.b_e) {
      throw ConfigError("envelope exp_noncm_2 needs [curve] b_e");
    }
    if ((e == Envelope::ag_cm || e == Envelope::exp_cm_2) && !scan.curve.cm_disc) {
      throw ConfigError("envelope " + to_string(e) + " needs [curve] cm_disc");
    }
  }
  if (s && *s < -1) throw ConfigError("s must be at least -1");
  if (smooth_support &&
      (effective_backend() != Backend::exact_generic || kind != DensityKind::cyclicity)) {
    throw ConfigError("smooth_support needs backend = exact and kind = cyclicity");
  }
  if (verify_x && (*verify_x < 1 || *verify_x > scan.x_max)) {
    throw ConfigError("[verify] x must lie in [1, x_max]");
  }
}

JobConfig parse_config(std::string_view text, const std::string& source) {
  const Sections sec(text, source);
  JobConfig job;
  CurveSpec& curve = job.scan.curve;

  sec.require("curve.a4");
  sec.require("curve.a6");
  sec.require("curve.conductor");
  sec.require("scan.x_max");
  curve.a4 = sec.get("curve.a4", parse_i64);
  curve.a6 = sec.get("curve.a6", parse_i64);
  if (curve.disc_core() == 0) sec.fail("curve.a6", "singular model: 4a4^3 + 27a6^2 = 0");
  curve.conductor = sec.get("curve.conductor", parse_u64);
  if (curve.conductor == 0) sec.fail("curve.conductor", "must be positive");
  if (sec.has("curve.label")) curve.label = sec.get("curve.label", [](const std::string& v) { return v; });
  if (std::abs(curve.a4) > (i64{1} << 40) || std::abs(curve.a6) > (i64{1} << 40)) {
    sec.fail("curve.a4", "coefficients beyond 2^40 are not supported");
  }
  std::vector<u64> bad = default_bad_primes(curve.a4, curve.a6);
  if (sec.has("curve.bad_primes")) {
    for (u64 p : sec.get("curve.bad_primes", [](const std::string& v) { return parse_u64_list(v); })) {
      if (!is_prime(p)) sec.fail("curve.bad_primes", std::to_string(p) + " is not prime");
      bad.push_back(p);
    }
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  curve.bad_primes = bad;
  for (const auto& pp : factorize(curve.conductor).factors) {
    if (!curve.is_bad(pp.prime)) {
      sec.fail("curve.conductor", "conductor prime " + std::to_string(pp.prime) +
                                      " is missing from the bad primes");
    }
  }
  if (sec.has("curve.cm_disc")) {
    curve.cm_disc = sec.get("curve.cm_disc", parse_u64);
    if (*curve.cm_disc == 0) sec.fail("curve.cm_disc", "must be positive");
  }
  if (sec.has("curve.serre_primes")) {
    auto primes = sec.get("curve.serre_primes", [](const std::string& v) { return parse_u64_list(v); });
    for (u64 p : primes) {
      if (!is_prime(p)) sec.fail("curve.serre_primes", std::to_string(p) + " is not prime");
    }
    std::sort(primes.begin(), primes.end());
    curve.serre_primes = primes;
  }
  if (sec.has("curve.b_e")) {
    curve.b_e = sec.get("curve.b_e", parse_u64);
    if (*curve.b_e == 0) sec.fail("curve.b_e", "must be positive");
  }
  if (sec.has("curve.assume_surjective")) {
    job.assume_surjective = sec.get("curve.assume_surjective", parse_bool);
    if (job.assume_surjective && curve.is_cm()) {
      sec.fail("curve.assume_surjective", "a CM curve is never surjective");
    }
  }

  ScanConfig& sc = job.scan;
  sc.x_max = sec.get("scan.x_max", parse_u64);
  if (sc.x_max < 1 || sc.x_max >= (u64{1} << 40)) sec.fail("scan.x_max", "must lie in [1, 2^40)");
  if (sec.has("scan.q")) sc.prog.modulus = sec.get("scan.q", parse_u64);
  if (sc.prog.modulus == 0) sec.fail("scan.q", "must be positive");
  sc.prog.residue = 1;
  if (sec.has("scan.a")) sc.prog.residue = sec.get("scan.a", parse_u64);
  if (sc.prog.modulus > 1) {
    sc.prog.residue %= sc.prog.modulus;
    if (gcd(sc.prog.residue, sc.prog.modulus) != 1) {
      sec.fail("scan.a", "gcd(a, q) must be 1");
    }
  }
  if (sec.has("scan.m_max")) sc.m_max = sec.get("scan.m_max", parse_u64);
  if (sc.m_max < 1 || sc.m_max > 100'000) sec.fail("scan.m_max", "must lie in [1, 100000]");
  if (sec.has("scan.shards")) {
    const u64 s = sec.get("scan.shards", parse_u64);
    if (s < 1 || s > 1024) sec.fail("scan.shards", "must lie in [1, 1024]");
    sc.shards = static_cast<unsigned>(s);
  }
  if (sec.has("scan.seed")) sc.seed = sec.get("scan.seed", parse_u64);
  if (sec.has("scan.crossover")) sc.crossover = sec.get("scan.crossover", parse_u64);
  if (sec.has("scan.checkpoints") &&
      sec.get("scan.checkpoints", [](const std::string& v) { return v; }) != "default") {
    sc.checkpoints = sec.get("scan.checkpoints", [](const std::string& v) { return parse_u64_list(v); });
    if (!std::is_sorted(sc.checkpoints.begin(), sc.checkpoints.end())) {
      sec.fail("scan.checkpoints", "must be ascending");
    }
    for (u64 c : sc.checkpoints) {
      if (c == 0 || c > sc.x_max) sec.fail("scan.checkpoints", "values must lie in [1, x_max]");
    }
  } else {
    sc.checkpoints = default_checkpoints(sc.x_max);
  }

  if (sec.has("constants.backend")) {
    job.backend = sec.get("constants.backend", [](const std::string& v) { return parse_backend(v); });
  }
  if (sec.has("constants.kind")) {
    job.kind = sec.get("constants.kind", [](const std::string& v) { return parse_kind(v); });
  }
  if (sec.has("constants.truncation")) {
    job.truncation = sec.get("constants.truncation", parse_u64);
    if (*job.truncation < 1 || *job.truncation > 100'000) {
      sec.fail("constants.truncation", "must lie in [1, 100000]");
    }
  }
  if (sec.has("constants.exponent_form")) {
    job.exponent_form = sec.get("constants.exponent_form",
                                [](const std::string& v) { return parse_exponent_form(v); });
  }
  if (sec.has("constants.smooth_support")) {
    job.smooth_support = sec.get("constants.smooth_support", parse_bool);
  }
  if (sec.has("constants.holdout")) {
    const auto h = sec.get("constants.holdout", [](const std::string& v) { return parse_u64_list(v); });
    if (h.size() != 2 || h[0] >= h[1] || h[1] > sc.x_max) {
      sec.fail("constants.holdout", "expected lo,hi with lo < hi <= x_max");
    }
    job.holdout = std::make_pair(h[0], h[1]);
  }

  if (sec.has("bounds.x_grid")) {
    job.x_grid = sec.get("bounds.x_grid", [](const std::string& v) {
      std::vector<double> out;
      for (auto item : split_list(v)) out.push_back(parse_double(item));
      return out;
    });
    for (double x : job.x_grid) {
      if (!(x >= 16)) sec.fail("bounds.x_grid", "values must be at least 16");
    }
  }
  if (sec.has("bounds.d_cap")) job.d_cap = sec.get("bounds.d_cap", parse_u64);
  if (job.d_cap < 1) sec.fail("bounds.d_cap", "must be positive");
  if (sec.has("bounds.s")) {
    job.s = sec.get("bounds.s", parse_double);
    if (*job.s < -1) sec.fail("bounds.s", "must be at least -1");
  }
  if (sec.has("bounds.envelopes")) {
    job.envelopes = sec.get("bounds.envelopes", [](const std::string& v) {
      std::vector<Envelope> out;
      for (auto item : split_list(v)) out.push_back(parse_envelope(std::string(item)));
      return out;
    });
  }

  if (sec.has("verify.x")) job.verify_x = sec.get("verify.x", parse_u64);
  if (sec.has("verify.oracle_limit")) job.oracle_limit = sec.get("verify.oracle_limit", parse_u64);
  if (job.oracle_limit > 100'000) sec.fail("verify.oracle_limit", "must be at most 100000");

  if (sec.has("output.dir")) {
    job.out_dir = sec.get("output.dir", [](const std::string& v) { return std::filesystem::path(v); });
  }

  job.validate();
  return job;
}

JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace cycloscan
