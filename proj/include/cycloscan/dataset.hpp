// On-disk formats: records CSV and checkpoint JSON, both format_version 1.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "cycloscan/scan.hpp"
#include "json.hpp"

namespace cycloscan {

inline constexpr int kFormatVersion = 1;

/// Thrown for malformed or incompatible files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string record_csv_header();
std::string record_csv_line(const PrimeRecord& r);

void write_records_csv(const std::filesystem::path& path, const std::vector<PrimeRecord>& records);
/// Reads and validates (version line, header, ascending p, record invariants).
/// Stops at the first record with p > up_to without validating the rest, so
/// a line torn by a crash after the last checkpoint is ignored.
std::vector<PrimeRecord> read_records_csv(const std::filesystem::path& path,
                                          u64 up_to = ~u64{0});

/// Appends records; flush() makes everything written so far durable.
class RecordWriter {
 public:
  /// Starts a fresh file, or with `keep` rewrites it with those records.
  RecordWriter(const std::filesystem::path& path, const std::vector<PrimeRecord>& keep = {});
  void append(const PrimeRecord& r);
  void flush();

 private:
  std::ofstream out_;
};

nlohmann::ordered_json snapshot_to_json(const Accumulator& acc);
Accumulator snapshot_from_json(const nlohmann::json& j);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, u64 x);
/// Write-then-rename so a crash never leaves a partial checkpoint.
void write_checkpoint(const std::filesystem::path& dir, const Accumulator& acc);
Accumulator read_checkpoint(const std::filesystem::path& path);
/// All checkpoints in dir, ascending x.
std::vector<Accumulator> read_checkpoints(const std::filesystem::path& dir);

/// Scan manifest used to refuse resuming with a different job.
nlohmann::ordered_json scan_manifest(const ScanConfig& config);

/// Records plus snapshots from a scan output directory.
ScanResult load_dataset(const std::filesystem::path& dir);

}  // namespace cycloscan
