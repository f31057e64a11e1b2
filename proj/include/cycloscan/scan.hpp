// Prime scan over a progression with checkpointed accumulators.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cycloscan/curve.hpp"
#include "cycloscan/structure.hpp"

namespace cycloscan {

struct ScanConfig {
  CurveSpec curve;
  u64 x_max = 0;
  Progression prog;
  std::vector<u64> checkpoints;  // ascending, each <= x_max; x_max is always added
  u64 m_max = 100;
  unsigned shards = 1;
  u64 seed = 0x5eed;
  u64 crossover = 10'000;

  /// Throws std::invalid_argument on a broken invariant.
  void validate() const;
  /// Checkpoints actually used: the configured list plus x_max, deduplicated.
  std::vector<u64> effective_checkpoints() const;
};

/// Powers of 10 and 2 * 10^k up to x_max, plus x_max itself.
std::vector<u64> default_checkpoints(u64 x_max);

/// Running totals for the good primes p <= x with p = a mod q.
struct Accumulator {
  u64 x = 0;
  u64 q = 1;
  u64 a = 1;
  u64 m_max = 100;
  u64 pi_all = 0;        // every prime <= x, any residue, good or bad
  u64 prime_count = 0;   // pi(x, q, a) over good primes
  u64 cyclic_count = 0;  // pi_c
  u128 exponent_sum = 0; // pi_e
  std::vector<u64> split_counts;  // index m = 1..m_max; pi_{E,m}
  u64 max_dp_seen = 0;

  static Accumulator empty(const Progression& prog, u64 m_max);
  void add(const PrimeRecord& r);
  /// Throws KernelFault if the documented invariants fail.
  void check() const;

  friend bool operator==(const Accumulator&, const Accumulator&) = default;
};

/// pi_{E,m}; throws std::out_of_range for m = 0 or m > m_max.
u64 pi_E_m(const Accumulator& acc, u64 m);

/// max over m of split_counts[m] * m^2 / x, the implied constant of the
/// x/m^2 sanity bound.
double split_bound_constant(const Accumulator& acc);

struct ScanResult {
  std::vector<PrimeRecord> records;
  std::vector<Accumulator> snapshots;  // one per checkpoint, ascending
};

struct ScanOptions {
  std::optional<std::filesystem::path> out_dir;
  bool resume = false;
  /// Called after each checkpoint is durable. Throwing aborts the scan.
  std::function<void(const Accumulator&)> on_checkpoint;
};

/// Scans every prime p <= x_max in the progression. Results do not depend on
/// the shard count. With out_dir set, writes records.csv, scan.json and
/// checkpoint_<x>.json; with resume set, continues from the latest
/// checkpoint found there.
ScanResult run_scan(const ScanConfig& config, const ScanOptions& options = {});

struct IdentityRow {
  u64 x = 0;
  i64 lhs = 0;
  i64 rhs = 0;
  i64 residual = 0;
  std::optional<i64> rhs_from_split_counts;  // when m_max >= max d_p
};

struct IdentityReport {
  bool pass = true;
  std::vector<IdentityRow> rows;
  std::optional<u64> offending_prime;
  std::string message;
};

/// pi_c(x) == sum over squarefree m of mu(m) pi_{E,m}(x), evaluated through
/// the squarefree divisors of each d_p, at every snapshot with x <= x_limit.
IdentityReport inclusion_exclusion_check(const ScanResult& data, u64 x_limit);

struct ExponentReport {
  bool pass = true;
  Rational sum_e;        // sum of e_p
  Rational expanded;     // sum of n_p * (sum over de | d_p of mu(d)/e)
  Rational regrouped;    // sum over m of c(m) * sum_{m | d_p} n_p, c = divisor_pair_coefficient
  std::optional<u64> offending_prime;
  std::string message;
};

/// Per-record e_p d_p = p + 1 - a_p and the aggregate expansions, all exact.
ExponentReport exponent_identity_check(const std::vector<PrimeRecord>& records);

}  // namespace cycloscan
