#include "cycloscan/scan.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <stdexcept>
#include <thread>

#include "cycloscan/dataset.hpp"

namespace cycloscan {

namespace fs = std::filesystem;

namespace {

constexpr u64 kBlock = u64{1} << 16;

std::vector<PrimeRecord> scan_block(const ScanConfig& config, const PrimeSieve& sieve, u64 lo,
                                    u64 hi) {
  std::vector<PrimeRecord> out;
  sieve.for_each(lo, hi, config.prog, [&](u64 p) {
    const auto curve = reduce_curve(config.curve, p);
    if (!curve) return;
    std::mt19937_64 rng(mix64(config.seed ^ mix64(p)));
    out.push_back(compute_record(*curve, rng, config.crossover));
  });
  return out;
}

}  // namespace

void ScanConfig::validate() const {
  curve.validate();
  prog.validate();
  if (x_max < 1) throw std::invalid_argument("x_max must be at least 1");
  if (x_max >= (u64{1} << 40)) throw std::invalid_argument("x_max too large");
  if (m_max < 1) throw std::invalid_argument("m_max must be at least 1");
  if (shards < 1) throw std::invalid_argument("shards must be at least 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw std::invalid_argument("checkpoints must be ascending");
  }
  for (u64 c : checkpoints) {
    if (c == 0 || c > x_max) throw std::invalid_argument("checkpoint outside [1, x_max]");
  }
}

std::vector<u64> ScanConfig::effective_checkpoints() const {
  std::vector<u64> out = checkpoints;
  out.push_back(x_max);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<u64> default_checkpoints(u64 x_max) {
  std::vector<u64> out;
  for (u64 p10 = 10; p10 <= x_max; p10 *= 10) {
    out.push_back(p10);
    if (2 * p10 <= x_max) out.push_back(2 * p10);
    if (p10 > x_max / 10) break;
  }
  if (out.empty() || out.back() != x_max) out.push_back(x_max);
  return out;
}

Accumulator Accumulator::empty(const Progression& prog, u64 m_max) {
  Accumulator acc;
  acc.q = prog.modulus;
  acc.a = prog.modulus == 1 ? 1 : prog.residue % prog.modulus;
  acc.m_max = m_max;
  acc.split_counts.assign(m_max + 1, 0);
  return acc;
}

void Accumulator::add(const PrimeRecord& r) {
  ++prime_count;
  if (r.dp == 1) ++cyclic_count;
  exponent_sum += r.ep;
  const u64 top = std::min(r.dp, m_max);
  for (u64 m = 1; m <= top; ++m) {
    if (r.dp % m == 0) ++split_counts[m];
  }
  max_dp_seen = std::max(max_dp_seen, r.dp);
}

void Accumulator::check() const {
  auto fail = [&](const std::string& what) {
    throw KernelFault("accumulator at x=" + std::to_string(x) + ": " + what);
  };
  if (split_counts.size() != m_max + 1) fail("split_counts size");
  if (cyclic_count > prime_count) fail("cyclic_count > prime_count");
  if (prime_count > pi_all) fail("prime_count > pi_all");
  if (split_counts[1] != prime_count) fail("split_counts[1] != prime_count");
  for (u64 m = 2; m <= m_max; ++m) {
    for (u64 k = 2 * m; k <= m_max; k += m) {
      if (split_counts[k] > split_counts[m]) fail("split_counts not monotone along divisibility");
    }
  }
}

u64 pi_E_m(const Accumulator& acc, u64 m) {
  if (m == 0 || m > acc.m_max) {
    throw std::out_of_range("pi_E_m: m=" + std::to_string(m) + " outside [1, m_max=" +
                            std::to_string(acc.m_max) + "]");
  }
  return acc.split_counts[m];
}

double split_bound_constant(const Accumulator& acc) {
  if (acc.x == 0) return 0.0;
  double worst = 0.0;
  for (u64 m = 1; m <= acc.m_max; ++m) {
    const double c = static_cast<double>(acc.split_counts[m]) * static_cast<double>(m * m) /
                     static_cast<double>(acc.x);
    worst = std::max(worst, c);
  }
  return worst;
}

ScanResult run_scan(const ScanConfig& config, const ScanOptions& options) {
  config.validate();
  const std::vector<u64> checkpoints = config.effective_checkpoints();
  const PrimeSieve sieve(config.x_max);

  ScanResult result;
  Accumulator acc = Accumulator::empty(config.prog, config.m_max);
  std::optional<RecordWriter> writer;

  if (options.out_dir) {
    const fs::path& dir = *options.out_dir;
    fs::create_directories(dir);
    const auto manifest = scan_manifest(config);
    const fs::path manifest_path = dir / "scan.json";
    if (options.resume && fs::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      nlohmann::ordered_json existing;
      in >> existing;
      if (existing != manifest) {
        throw std::invalid_argument("resume: " + manifest_path.string() +
                                    " describes a different job");
      }
      for (auto& snap : read_checkpoints(dir)) {
        if (snap.x <= config.x_max) result.snapshots.push_back(std::move(snap));
      }
      if (!result.snapshots.empty()) {
        acc = result.snapshots.back();
        const fs::path csv = dir / "records.csv";
        result.records = read_records_csv(csv, acc.x);
        if (result.records.size() != acc.prime_count) {
          throw FormatError("resume: records.csv has " + std::to_string(result.records.size()) +
                            " records up to x=" + std::to_string(acc.x) + ", checkpoint says " +
                            std::to_string(acc.prime_count));
        }
      }
    } else {
      std::ofstream(manifest_path) << manifest.dump(2) << "\n";
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().filename().string().rfind("checkpoint_", 0) == 0) fs::remove(entry.path());
      }
    }
    writer.emplace(dir / "records.csv", result.records);
    writer->flush();
  }

  auto next_cp = std::upper_bound(checkpoints.begin(), checkpoints.end(), acc.x);
  u64 last_x = acc.x;
  auto emit = [&](u64 c) {
    acc.pi_all += sieve.count(last_x + 1, c);
    acc.x = c;
    last_x = c;
    acc.check();
    if (writer) {
      writer->flush();
      write_checkpoint(*options.out_dir, acc);
    }
    result.snapshots.push_back(acc);
    if (options.on_checkpoint) options.on_checkpoint(acc);
  };

  u64 lo = acc.x + 1;
  const unsigned shards = config.shards;
  while (lo <= config.x_max) {
    std::vector<std::pair<u64, u64>> ranges;
    for (unsigned i = 0; i < shards && lo <= config.x_max; ++i) {
      const u64 hi = std::min(config.x_max, lo + kBlock - 1);
      ranges.emplace_back(lo, hi);
      lo = hi + 1;
    }
    std::vector<std::vector<PrimeRecord>> blocks(ranges.size());
    if (ranges.size() == 1) {
      blocks[0] = scan_block(config, sieve, ranges[0].first, ranges[0].second);
    } else {
      std::vector<std::exception_ptr> errors(ranges.size());
      std::vector<std::thread> workers;
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        workers.emplace_back([&, i] {
          try {
            blocks[i] = scan_block(config, sieve, ranges[i].first, ranges[i].second);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
      for (auto& w : workers) w.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    // Single writer: fold blocks in ascending order.
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      for (const auto& r : blocks[i]) {
        while (next_cp != checkpoints.end() && *next_cp < r.p) emit(*next_cp++);
        acc.add(r);
        if (writer) writer->append(r);
        result.records.push_back(r);
      }
      while (next_cp != checkpoints.end() && *next_cp <= ranges[i].second) emit(*next_cp++);
    }
  }
  while (next_cp != checkpoints.end()) emit(*next_cp++);
  return result;
}

IdentityReport inclusion_exclusion_check(const ScanResult& data, u64 x_limit) {
  IdentityReport rep;
  std::map<u64, std::vector<std::pair<u64, int>>> sqfree_cache;
  i64 lhs = 0, rhs = 0;
  std::size_t i = 0;
  const auto& recs = data.records;
  for (const auto& snap : data.snapshots) {
    if (snap.x > x_limit) break;
    for (; i < recs.size() && recs[i].p <= snap.x; ++i) {
      const PrimeRecord& r = recs[i];
      auto it = sqfree_cache.find(r.dp);
      if (it == sqfree_cache.end()) {
        it = sqfree_cache.emplace(r.dp, squarefree_divisors(factorize(r.dp))).first;
      }
      i64 term = 0;
      for (const auto& [m, mu] : it->second) term += mu;
      const i64 own = r.dp == 1 ? 1 : 0;
      lhs += own;
      rhs += term;
      const bool cutoff_ok = static_cast<u128>(r.dp) * r.dp <= r.n;
      if ((term != own || !cutoff_ok) && !rep.offending_prime) rep.offending_prime = r.p;
    }
    IdentityRow row{snap.x, lhs, rhs, lhs - rhs, std::nullopt};
    if (snap.m_max >= snap.max_dp_seen) {
      i64 via = 0;
      for (u64 m = 1; m <= snap.m_max; ++m) via += mobius(m) * static_cast<i64>(snap.split_counts[m]);
      row.rhs_from_split_counts = via;
      if (via != lhs) rep.pass = false;
    }
    if (row.residual != 0 || static_cast<u64>(lhs) != snap.cyclic_count) rep.pass = false;
    rep.rows.push_back(row);
  }
  if (rep.offending_prime) rep.pass = false;
  if (!rep.pass) {
    rep.message = rep.offending_prime
                      ? "identity fails first at p=" + std::to_string(*rep.offending_prime)
                      : "snapshot totals disagree with records";
  }
  return rep;
}

ExponentReport exponent_identity_check(const std::vector<PrimeRecord>& records) {
  ExponentReport rep;
  std::map<u64, Rational> inner_cache;
  std::map<u64, u128> n_by_dp;
  i128 sum_e = 0;
  for (const auto& r : records) {
    const bool record_ok = r.n == static_cast<u64>(static_cast<i64>(r.p) + 1 - r.ap) &&
                           static_cast<u128>(r.ep) * r.dp == r.n;
    auto it = inner_cache.find(r.dp);
    if (it == inner_cache.end()) it = inner_cache.emplace(r.dp, inner_mu_sum(r.dp)).first;
    const Rational term = Rational(static_cast<i128>(r.n)) * it->second;
    if ((!record_ok || term != Rational(static_cast<i128>(r.ep))) && !rep.offending_prime) {
      rep.offending_prime = r.p;
    }
    rep.expanded += term;
    sum_e += r.ep;
    n_by_dp[r.dp] += r.n;
  }
  rep.sum_e = Rational(sum_e);
  // S_m = sum of n_p over m | d_p; m | n_p so c(m) S_m has denominator | m.
  std::map<u64, u128> s_m;
  for (const auto& [dp, total] : n_by_dp) {
    for (u64 m : divisors(factorize(dp))) s_m[m] += total;
  }
  for (const auto& [m, total] : s_m) {
    rep.regrouped += divisor_pair_coefficient(m) * Rational(static_cast<i128>(total));
  }
  if (rep.offending_prime) {
    rep.pass = false;
    rep.message = "record identity fails at p=" + std::to_string(*rep.offending_prime);
  } else if (!(rep.expanded == rep.sum_e) || !(rep.regrouped == rep.sum_e)) {
    rep.pass = false;
    rep.message = "aggregate expansion differs from sum of e_p";
  }
  return rep;
}

}  // namespace cycloscan
