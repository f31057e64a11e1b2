// Job configuration: sectioned key = value text, one assignment per line.
//
//   [curve]      label a4 a6 conductor bad_primes cm_disc serre_primes b_e
//                assume_surjective
//   [scan]       x_max q a checkpoints m_max shards seed crossover
//   [constants]  backend kind truncation exponent_form smooth_support holdout
//   [bounds]     x_grid d_cap s envelopes
//   [verify]     x oracle_limit
//   [output]     dir
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cycloscan/bounds.hpp"
#include "cycloscan/constants.hpp"
#include "cycloscan/scan.hpp"

namespace cycloscan {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what);
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct JobConfig {
  ScanConfig scan;  // scan.curve holds the curve
  bool assume_surjective = false;

  std::optional<Backend> backend;  // empty: exact unless CM
  DensityKind kind = DensityKind::cyclicity;
  std::optional<u64> truncation;   // empty: 50 exact, 30 otherwise
  ExponentForm exponent_form = ExponentForm::mobius_inverse;
  bool smooth_support = false;
  std::optional<std::pair<u64, u64>> holdout;  // (lo, hi]; empty: (x/2, x]

  std::vector<double> x_grid;
  u64 d_cap = 1'000'000;
  std::optional<double> s;
  std::vector<Envelope> envelopes;

  std::optional<u64> verify_x;  // empty: scan.x_max
  u64 oracle_limit = 2000;

  std::filesystem::path out_dir = "out";

  Backend effective_backend() const;
  u64 effective_truncation() const;
  std::pair<u64, u64> effective_holdout() const;
  ConstantsOptions constants_options(const HoldoutSample* sample) const;

  /// Cross-field checks. Throws ConfigError.
  void validate() const;
};

/// Parses and validates. Messages are anchored as "source:line: ...".
JobConfig parse_config(std::string_view text, const std::string& source = "<config>");
JobConfig load_config(const std::filesystem::path& path);

/// "default" or a comma list of integers (1e6 and 10^6 forms accepted).
std::vector<u64> parse_u64_list(std::string_view s);
u64 parse_u64(std::string_view s);

}  // namespace cycloscan
