#include "idlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "idlab/checkpoint.hpp"
#include "idlab/dataset_io.hpp"
#include "idlab/errors.hpp"

namespace idlab {
namespace {

enum SeedTag : std::uint64_t {
  kDgpTag = 0x6467'7000,
  kTrainTag = 0x7472'6e00,
  kProbeTag = 0x7072'6200,
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t metric_index(const std::string& name) {
  const auto& names = run_metric_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(Errc::invalid_input, "unknown metric '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

const std::vector<std::string>& run_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = EvalReport::metric_names();
    n.insert(n.end(), {"initial_loss", "final_loss", "final_accuracy"});
    return n;
  }();
  return names;
}

double SeedRun::metric(const std::string& name) const {
  std::size_t i = metric_index(name);
  return ok && i < metrics.size() ? metrics[i] : std::numeric_limits<double>::quiet_NaN();
}

int ExperimentResult::failed() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const SeedRun& r) { return !r.ok; }));
}

std::vector<double> ExperimentResult::values(const std::string& name) const {
  std::vector<double> out;
  for (const SeedRun& r : runs) {
    double v = r.metric(name);
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

MetricSummary ExperimentResult::summary(const std::string& name) const {
  std::vector<double> v = values(name);
  MetricSummary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(v.size() - 1));
  }
  return s;
}

double ExperimentResult::median(const std::string& name) const {
  std::vector<double> v = values(name);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SeedStreams derive_seed_streams(const ExperimentConfig& config, std::uint64_t seed) {
  return {hash_words({seed, config.dgp.seed, kDgpTag}), hash_words({seed, config.train.seed, kTrainTag}),
          hash_words({seed, config.train.seed, kProbeTag})};
}

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed, const RunOptions& options) {
  SeedRun run;
  run.seed = seed;
  try {
    const SeedStreams streams = derive_seed_streams(config, seed);
    DgpSpec spec = config.dgp;
    spec.seed = streams.dgp;
    Dataset dataset = generate_dataset(spec);
    TrainConfig tc = config.train;
    tc.seed = streams.train;

    auto start = std::chrono::steady_clock::now();
    TrainResult trained = train(dataset, tc);
    run.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    EvalReport report = evaluate(trained.model, dataset, tc.task, config.probe, streams.probe);
    run.metrics = report.metric_values();
    run.metrics.push_back(trained.trace.initial_loss());
    run.metrics.push_back(trained.trace.final_loss());
    run.metrics.push_back(trained.trace.epochs.back().accuracy);
    run.ok = true;

    if (options.save_artifacts) {
      std::filesystem::path dir = std::filesystem::path(config.output_dir) / ("seed-" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      save_dataset(dataset, (dir / "dataset.bin").string());
      write_dataset_sidecar(dataset, (dir / "dataset.bin").string());
      save_checkpoint(trained.model, (dir / "model.ckpt").string());
      trained.trace.write_csv((dir / "trace.csv").string());
    }
  } catch (const Error& e) {
    run.ok = false;
    run.metrics.clear();
    run.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    run.ok = false;
    run.metrics.clear();
    run.error = e.what();
  }
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.config_hash = config_hash(config);
  result.runs.resize(config.seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      result.runs[i] = run_seed(config, config.seeds[i], options);
      if (options.log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        const SeedRun& r = result.runs[i];
        *options.log << "  seed " << r.seed << ": "
                     << (r.ok ? "ok (" + format_double(r.train_seconds) + " s)" : "FAILED " + r.error) << '\n';
      }
    }
  };
  const int threads = std::clamp(options.parallelism, 1, static_cast<int>(config.seeds.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (options.write_outputs) {
    std::filesystem::create_directories(config.output_dir);
    write_seed_csv(result, (std::filesystem::path(config.output_dir) / "seeds.csv").string());
    write_aggregate_csv(result, (std::filesystem::path(config.output_dir) / "aggregate.csv").string());
  }
  return result;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string seed_csv_header() {
  std::string h = "artifact_version,config_hash,seed,status";
  for (const auto& n : run_metric_names()) h += "," + n;
  return h + ",train_seconds";
}

std::string seed_csv_row(const ExperimentResult& result, const SeedRun& run) {
  std::string row = std::string(kArtifactVersion) + "," + result.config_hash + "," + std::to_string(run.seed) + "," +
                    (run.ok ? "ok" : "error");
  for (std::size_t i = 0; i < run_metric_names().size(); ++i)
    row += "," + format_double(run.ok ? run.metrics[i] : std::numeric_limits<double>::quiet_NaN());
  return row + "," + format_double(run.train_seconds);
}

std::string aggregate_csv_header() {
  std::string h = "artifact_version,config_hash,n_seeds,n_failed";
  for (const auto& n : run_metric_names()) h += "," + n + "_mean," + n + "_std";
  return h;
}

std::string aggregate_csv_row(const ExperimentResult& result) {
  std::string row = std::string(kArtifactVersion) + "," + result.config_hash + "," +
                    std::to_string(result.runs.size()) + "," + std::to_string(result.failed());
  for (const auto& n : run_metric_names()) {
    MetricSummary s = result.summary(n);
    row += "," + format_double(s.mean) + "," + format_double(s.std);
  }
  return row;
}

void write_seed_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << seed_csv_header() << '\n';
  for (const SeedRun& r : result.runs) out << seed_csv_row(result, r) << '\n';
}

void write_aggregate_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << aggregate_csv_header() << '\n' << aggregate_csv_row(result) << '\n';
}

std::vector<SeedRun> read_seed_csv(const std::string& path, const std::string& expected_hash) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != seed_csv_header()) throw Error(Errc::io, path + ": unexpected header");
  const std::size_t n_metrics = run_metric_names().size();
  std::vector<SeedRun> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 4 + n_metrics + 1) throw Error(Errc::io, path + ": malformed row");
    if (cells[1] != expected_hash) throw Error(Errc::io, path + ": config hash mismatch");
    SeedRun r;
    r.seed = std::stoull(cells[2]);
    r.ok = cells[3] == "ok";
    if (r.ok)
      for (std::size_t i = 0; i < n_metrics; ++i) r.metrics.push_back(std::strtod(cells[4 + i].c_str(), nullptr));
    else
      r.error = "failed in an earlier run";
    r.train_seconds = std::strtod(cells.back().c_str(), nullptr);
    runs.push_back(std::move(r));
  }
  return runs;
}

}  // namespace idlab
