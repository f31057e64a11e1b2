// cycloscan: scan, constants, compare, bounds, verify, export.
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cycloscan/bounds.hpp"
#include "cycloscan/config.hpp"
#include "cycloscan/constants.hpp"
#include "cycloscan/dataset.hpp"
#include "cycloscan/scan.hpp"
#include "cycloscan/verify.hpp"

namespace fs = std::filesystem;
using namespace cycloscan;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<u64> shards;
  std::optional<u64> seed;
  std::string checkpoints;
  std::optional<u64> m_max;
  std::optional<u64> truncation;
  std::string backend;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "job configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (overrides [output] dir)");
  cmd->add_option("--shards", o.shards, "worker threads");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--checkpoints", o.checkpoints, "comma list or 'default'");
  cmd->add_option("--m-max", o.m_max, "largest m tracked per checkpoint");
  cmd->add_option("--truncation", o.truncation, "truncation M for the constants");
  cmd->add_option("--backend", o.backend, "exact, empirical or hybrid");
}

JobConfig load_job(const Overrides& o) {
  JobConfig job;
  try {
    job = load_config(o.config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(o.config + ": " + e.what());
  }
  if (!o.out.empty()) job.out_dir = o.out;
  if (o.shards) job.scan.shards = static_cast<unsigned>(*o.shards);
  if (const char* env = std::getenv("CYCLOSCAN_THREADS"); env && *env) {
    try {
      job.scan.shards = static_cast<unsigned>(parse_u64(env));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("CYCLOSCAN_THREADS: ") + e.what());
    }
  }
  if (job.scan.shards < 1 || job.scan.shards > 1024) throw ConfigError("shards must lie in [1, 1024]");
  if (o.seed) job.scan.seed = *o.seed;
  if (!o.checkpoints.empty()) {
    try {
      job.scan.checkpoints = o.checkpoints == "default" ? default_checkpoints(job.scan.x_max)
                                                        : parse_u64_list(o.checkpoints);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--checkpoints: ") + e.what());
    }
  }
  if (o.m_max) job.scan.m_max = *o.m_max;
  if (o.truncation) job.truncation = *o.truncation;
  if (!o.backend.empty()) {
    try {
      job.backend = parse_backend(o.backend);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--backend: ") + e.what());
    }
  }
  job.validate();
  return job;
}

fs::path dataset_dir(const JobConfig& job, const std::string& flag) {
  return flag.empty() ? job.out_dir : fs::path(flag);
}

Envelope default_envelope(const JobConfig& job) {
  const bool cm = job.scan.curve.is_cm();
  if (job.kind == DensityKind::exponent) return cm ? Envelope::exp_cm_1 : Envelope::exp_noncm_1;
  return cm ? Envelope::cm_grh : Envelope::noncm_grh;
}

std::function<double(double)> envelope_fn(const JobConfig& job, Envelope env) {
  return [&job, env](double x) {
    BoundsInput in = BoundsInput::from_curve(job.scan.curve, x, job.scan.prog.modulus,
                                             job.scan.prog.residue);
    in.S = job.s;
    return evaluate_envelope(env, in, job.d_cap);
  };
}

DensityEstimate read_estimate(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants report " + path.string());
  nlohmann::json j;
  in >> j;
  return estimate_from_json(j);
}

int cmd_scan(const Overrides& o, bool resume) {
  const JobConfig job = load_job(o);
  ScanOptions opts;
  opts.out_dir = job.out_dir;
  opts.resume = resume;
  const ScanResult res = run_scan(job.scan, opts);
  const Accumulator& s = res.snapshots.back();
  std::cout << "x=" << s.x << " primes=" << s.prime_count << " cyclic=" << s.cyclic_count
            << " exponent_sum=" << to_string(s.exponent_sum) << " max_dp=" << s.max_dp_seen
            << "\nwrote " << res.snapshots.size() << " checkpoints to " << job.out_dir.string()
            << "\n";
  return 0;
}

int cmd_constants(const Overrides& o, const std::string& dataset, const std::string& report) {
  const JobConfig job = load_job(o);
  std::optional<HoldoutSample> sample;
  if (job.effective_backend() != Backend::exact_generic) {
    const ScanResult data = load_dataset(dataset_dir(job, dataset));
    const auto [lo, hi] = job.effective_holdout();
    sample = make_holdout(data.records, lo, hi, job.scan.prog);
  }
  const DensityEstimate est =
      density_constant(job.scan.curve, job.constants_options(sample ? &*sample : nullptr));
  const fs::path out = report.empty() ? job.out_dir / "constants.json" : fs::path(report);
  fs::create_directories(out.parent_path().empty() ? fs::path(".") : out.parent_path());
  std::ofstream(out) << estimate_to_json(est).dump(2) << "\n";
  std::cout << std::setprecision(12) << to_string(est.kind) << " constant " << est.value
            << " (M=" << est.M << ", " << to_string(est.backend)
            << ", truncation bound " << est.truncation_bound << ", statistical error "
            << est.statistical_error << ")\nwrote " << out.string() << "\n";
  return 0;
}

int cmd_compare(const Overrides& o, const std::string& dataset, const std::string& constants,
                const std::string& envelope_name, u64 x_min) {
  const JobConfig job = load_job(o);
  const fs::path dir = dataset_dir(job, dataset);
  const ScanResult data = load_dataset(dir);
  const DensityEstimate est = read_estimate(constants.empty() ? dir / "constants.json" : fs::path(constants));
  const Envelope env = envelope_name.empty() ? default_envelope(job) : parse_envelope(envelope_name);
  const EnvelopeReport rep = residual_report(data.snapshots, est, envelope_fn(job, env), x_min);

  std::ofstream csv(dir / "compare.csv");
  csv << std::setprecision(17) << "x,observed,envelope,ratio\n";
  for (const auto& r : rep.rows) csv << r.x << "," << r.residual << "," << r.envelope << "," << r.ratio << "\n";
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = to_string(est.kind);
  j["constant"] = est.value;
  j["envelope"] = to_string(env);
  j["envelope_note"] = "envelope shape, implied constant 1";
  j["slope_fit"] = rep.slope_fit ? nlohmann::ordered_json(*rep.slope_fit) : nlohmann::ordered_json(nullptr);
  if (!rep.slope_note.empty()) j["slope_note"] = rep.slope_note;
  j["checkpoints"] = rep.rows.size();
  std::ofstream(dir / "compare.json") << j.dump(2) << "\n";

  std::cout << std::setprecision(6) << "x,count,main,residual,envelope,ratio\n";
  for (const auto& r : rep.rows) {
    std::cout << r.x << "," << r.observed << "," << r.main_term << "," << r.residual << ","
              << r.envelope << "," << r.ratio << "\n";
  }
  if (rep.slope_fit) {
    std::cout << "slope_fit=" << *rep.slope_fit << "\n";
  } else {
    std::cout << "slope_fit undefined (" << rep.slope_note << ")\n";
  }
  return 0;
}

int cmd_bounds(const Overrides& o) {
  const JobConfig job = load_job(o);
  std::vector<double> grid = job.x_grid;
  if (grid.empty()) grid = {1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
  std::vector<Envelope> envs = job.envelopes;
  if (envs.empty()) {
    const CurveSpec& c = job.scan.curve;
    for (Envelope e : all_envelopes()) {
      if ((e == Envelope::siegel_c || e == Envelope::siegel_e) && !job.s) continue;
      if (e == Envelope::exp_noncm_2 && !c.b_e) continue;
      if ((e == Envelope::ag_cm || e == Envelope::exp_cm_2) && !c.cm_disc) continue;
      envs.push_back(e);
    }
  }
  fs::create_directories(job.out_dir);
  std::ofstream csv(job.out_dir / "bounds.csv");
  csv << std::setprecision(17) << "x";
  std::cout << std::setprecision(6) << "x";
  for (Envelope e : envs) {
    csv << "," << to_string(e);
    std::cout << "," << to_string(e);
  }
  csv << "\n";
  std::cout << "\n";
  for (double x : grid) {
    csv << x;
    std::cout << x;
    for (Envelope e : envs) {
      const double v = envelope_fn(job, e)(x);
      csv << "," << v;
      std::cout << "," << v;
    }
    csv << "\n";
    std::cout << "\n";
  }
  const BoundsInput in = BoundsInput::from_curve(job.scan.curve, grid.front(), job.scan.prog.modulus,
                                                 job.scan.prog.residue);
  const QSplit qs = q_split(in.q, in.m_e);
  std::cout << "M_E=" << in.m_e << " A(E)=" << in.a_e << " q1=" << qs.q1 << " q2=" << qs.q2
            << " R_E_q1=" << R_E_q1(in.m_e, qs.q1);
  if (in.D) std::cout << " G_D_bound=" << G_D_bound(*in.D, in.q);
  if (in.b_e) {
    const SESum se = S_E(in.m_e, *in.b_e, job.d_cap);
    std::cout << " S_E=" << se.partial << " (tail " << se.tail << ")";
  }
  if (job.s) {
    BoundsInput si = in;
    si.S = job.s;
    std::cout << " siegel_uniformity=" << envelope_siegel(si).uniformity_boundary;
  }
  std::cout << "\n(envelope shapes with implied constant 1)\nwrote " << (job.out_dir / "bounds.csv").string() << "\n";
  return 0;
}

int cmd_verify(const Overrides& o) {
  const JobConfig job = load_job(o);
  const VerifyReport rep = run_verify(job);
  rep.print(std::cout);
  return rep.pass() ? 0 : 1;
}

int cmd_export(const Overrides& o, const std::string& dataset, const std::string& constants,
               const std::string& format) {
  const JobConfig job = load_job(o);
  const fs::path dir = dataset_dir(job, dataset);
  const ScanResult data = load_dataset(dir);
  const DensityEstimate est = read_estimate(constants.empty() ? dir / "constants.json" : fs::path(constants));
  const auto env = envelope_fn(job, default_envelope(job));
  const char sep = format == "csv" ? ',' : '\t';
  const bool exponent = est.kind == DensityKind::exponent;
  const fs::path out = dir / (format == "csv" ? "export.csv" : "export.tsv");
  std::ofstream f(out);
  f << std::setprecision(17);
  f << "x" << sep << (exponent ? "pi_e" : "pi_c") << sep << "main" << sep << "residual" << sep
    << "envelope\n";
  for (const auto& s : data.snapshots) {
    if (s.x < 16) continue;
    const double x = static_cast<double>(s.x);
    const double obs = exponent ? static_cast<double>(s.exponent_sum) : static_cast<double>(s.cyclic_count);
    const double main = est.value * (exponent ? log_integral(x * x) : log_integral(x));
    f << s.x << sep << obs << sep << main << sep << obs - main << sep << env(x) << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cycloscan: cyclicity and exponent statistics of elliptic curves mod p"};
  app.require_subcommand(1);
  Overrides o;
  std::string dataset, constants, report, envelope, format = "tsv";
  bool resume = false;
  u64 x_min = 16;

  auto* scan = app.add_subcommand("scan", "scan primes and write records and checkpoints");
  add_common(scan, o);
  scan->add_flag("--resume", resume, "continue from the latest checkpoint in the output directory");

  auto* cons = app.add_subcommand("constants", "truncated density constant report");
  add_common(cons, o);
  cons->add_option("--dataset", dataset, "scan output directory");
  cons->add_option("--report", report, "report path (default <out>/constants.json)");

  auto* cmp = app.add_subcommand("compare", "residuals against the main term and an envelope");
  add_common(cmp, o);
  cmp->add_option("--dataset", dataset, "scan output directory");
  cmp->add_option("--constants", constants, "constants report");
  cmp->add_option("--envelope", envelope, "envelope name");
  cmp->add_option("--x-min", x_min, "ignore checkpoints below this x");

  auto* bnd = app.add_subcommand("bounds", "envelope table over an x grid");
  add_common(bnd, o);

  auto* ver = app.add_subcommand("verify", "identity and oracle suite");
  add_common(ver, o);

  auto* exp = app.add_subcommand("export", "plot-ready table");
  add_common(exp, o);
  exp->add_option("--dataset", dataset, "scan output directory");
  exp->add_option("--constants", constants, "constants report");
  exp->add_option("--format", format, "tsv or csv")->check(CLI::IsMember({"tsv", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*scan) return cmd_scan(o, resume);
    if (*cons) return cmd_constants(o, dataset, report);
    if (*cmp) return cmd_compare(o, dataset, constants, envelope, x_min);
    if (*bnd) return cmd_bounds(o);
    if (*ver) return cmd_verify(o);
    if (*exp) return cmd_export(o, dataset, constants, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const GenericityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
