#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "idlab/config.hpp"

namespace idlab {

/// Scalar columns reported per seed: EvalReport::metric_names() followed by
/// the training summaries.
const std::vector<std::string>& run_metric_names();

struct SeedRun {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> metrics;  // aligned with run_metric_names(); empty on error
  double train_seconds = 0.0;

  double metric(const std::string& name) const;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
  int count = 0;     // finite values used
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<SeedRun> runs;

  int failed() const;
  /// Finite values of a metric across successful seeds, in seed-list order.
  std::vector<double> values(const std::string& name) const;
  MetricSummary summary(const std::string& name) const;
  double mean(const std::string& name) const { return summary(name).mean; }
  double median(const std::string& name) const;
};

/// Per-seed stream derivation: dataset, initialization/shuffling and probe
/// draws for a seed-list entry.
struct SeedStreams {
  std::uint64_t dgp = 0;
  std::uint64_t train = 0;
  std::uint64_t probe = 0;
};
SeedStreams derive_seed_streams(const ExperimentConfig& config, std::uint64_t seed);

struct RunOptions {
  int parallelism = 1;          // seeds trained concurrently
  bool write_outputs = true;    // per-seed and aggregate CSVs under output_dir
  bool save_artifacts = false;  // dataset, checkpoint and trace per seed
  std::ostream* log = nullptr;
};

/// generate -> (label noise) -> train -> evaluate for one seed. Errors are
/// captured in the returned record.
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed, const RunOptions& options = {});

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// CSV forms. Every row carries the artifact version, the config hash and
// (per-seed rows) the seed. The aggregate form has no timing columns.
std::string seed_csv_header();
std::string seed_csv_row(const ExperimentResult& result, const SeedRun& run);
std::string aggregate_csv_header();
std::string aggregate_csv_row(const ExperimentResult& result);

void write_seed_csv(const ExperimentResult& result, const std::string& path);
void write_aggregate_csv(const ExperimentResult& result, const std::string& path);
/// Rebuilds the per-seed records from a file written by write_seed_csv.
std::vector<SeedRun> read_seed_csv(const std::string& path, const std::string& expected_hash);

std::string format_double(double v);

}  // namespace idlab
