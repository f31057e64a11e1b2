#include "cycloscan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <string>

namespace cycloscan {

namespace fs = std::filesystem;

namespace {

const std::string kVersionLine = "# format_version=1";

template <class T>
T parse_field(std::string_view s, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(where + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("checkpoint missing field ") + key);
  return j.at(key).get<T>();
}

}  // namespace

std::string record_csv_header() { return "p,ap,n,dp,ep"; }

std::string record_csv_line(const PrimeRecord& r) {
  return std::to_string(r.p) + "," + std::to_string(r.ap) + "," + std::to_string(r.n) + "," +
         std::to_string(r.dp) + "," + std::to_string(r.ep);
}

void write_records_csv(const fs::path& path, const std::vector<PrimeRecord>& records) {
  RecordWriter w(path, records);
  w.flush();
}

std::vector<PrimeRecord> read_records_csv(const fs::path& path, u64 up_to) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kVersionLine) {
    throw FormatError(path.string() + ":1: expected '" + kVersionLine + "'");
  }
  if (!std::getline(in, line) || line != record_csv_header()) {
    throw FormatError(path.string() + ":2: expected header '" + record_csv_header() + "'");
  }
  std::vector<PrimeRecord> out;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      cols.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cols.push_back(rest);
    PrimeRecord r;
    r.p = parse_field<u64>(cols[0], where);
    if (r.p > up_to) break;
    if (cols.size() != 5) throw FormatError(where + ": expected 5 columns");
    r.ap = parse_field<i64>(cols[1], where);
    r.n = parse_field<u64>(cols[2], where);
    r.dp = parse_field<u64>(cols[3], where);
    r.ep = parse_field<u64>(cols[4], where);
    if (!out.empty() && r.p <= out.back().p) throw FormatError(where + ": p not ascending");
    try {
      check_record(r);
    } catch (const KernelFault& e) {
      throw FormatError(where + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

RecordWriter::RecordWriter(const fs::path& path, const std::vector<PrimeRecord>& keep)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << kVersionLine << "\n" << record_csv_header() << "\n";
  for (const auto& r : keep) append(r);
}

void RecordWriter::append(const PrimeRecord& r) { out_ << record_csv_line(r) << "\n"; }

void RecordWriter::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("record write failed");
}

nlohmann::ordered_json snapshot_to_json(const Accumulator& acc) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["x"] = acc.x;
  j["q"] = acc.q;
  j["a"] = acc.a;
  j["m_max"] = acc.m_max;
  j["pi_all"] = acc.pi_all;
  j["prime_count"] = acc.prime_count;
  j["cyclic_count"] = acc.cyclic_count;
  j["exponent_sum"] = to_string(acc.exponent_sum);
  j["max_dp_seen"] = acc.max_dp_seen;
  nlohmann::ordered_json split = nlohmann::ordered_json::object();
  for (u64 m = 1; m < acc.split_counts.size(); ++m) split[std::to_string(m)] = acc.split_counts[m];
  j["split_counts"] = split;
  return j;
}

Accumulator snapshot_from_json(const nlohmann::json& j) {
  if (get<int>(j, "format_version") != kFormatVersion) {
    throw FormatError("unsupported checkpoint format_version");
  }
  Accumulator acc;
  acc.x = get<u64>(j, "x");
  acc.q = get<u64>(j, "q");
  acc.a = get<u64>(j, "a");
  acc.m_max = get<u64>(j, "m_max");
  acc.pi_all = get<u64>(j, "pi_all");
  acc.prime_count = get<u64>(j, "prime_count");
  acc.cyclic_count = get<u64>(j, "cyclic_count");
  try {
    acc.exponent_sum = parse_u128(get<std::string>(j, "exponent_sum"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("checkpoint exponent_sum: ") + e.what());
  }
  acc.max_dp_seen = get<u64>(j, "max_dp_seen");
  acc.split_counts.assign(acc.m_max + 1, 0);
  const auto& split = j.at("split_counts");
  if (split.size() != acc.m_max) throw FormatError("checkpoint split_counts size != m_max");
  for (const auto& [key, value] : split.items()) {
    const u64 m = parse_field<u64>(key, "checkpoint split_counts");
    if (m == 0 || m > acc.m_max) throw FormatError("checkpoint split_counts key out of range");
    acc.split_counts[m] = value.get<u64>();
  }
  try {
    acc.check();
  } catch (const KernelFault& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return acc;
}

fs::path checkpoint_path(const fs::path& dir, u64 x) {
  return dir / ("checkpoint_" + std::to_string(x) + ".json");
}

void write_checkpoint(const fs::path& dir, const Accumulator& acc) {
  const fs::path final_path = checkpoint_path(dir, acc.x);
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snapshot_to_json(acc).dump(2) << "\n";
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

Accumulator read_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    return snapshot_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<Accumulator> read_checkpoints(const fs::path& dir) {
  std::vector<Accumulator> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("checkpoint_", 0) == 0 && entry.path().extension() == ".json") {
      out.push_back(read_checkpoint(entry.path()));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  return out;
}

nlohmann::ordered_json scan_manifest(const ScanConfig& config) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["label"] = config.curve.label;
  j["a4"] = config.curve.a4;
  j["a6"] = config.curve.a6;
  j["bad_primes"] = config.curve.bad_primes;
  j["q"] = config.prog.modulus;
  j["a"] = config.prog.residue;
  j["m_max"] = config.m_max;
  j["seed"] = config.seed;
  return j;
}

ScanResult load_dataset(const fs::path& dir) {
  ScanResult out;
  out.snapshots = read_checkpoints(dir);
  // Records past the last checkpoint are not covered by any snapshot.
  const u64 x = out.snapshots.empty() ? ~u64{0} : out.snapshots.back().x;
  out.records = read_records_csv(dir / "records.csv", x);
  return out;
}

}  // namespace cycloscan
