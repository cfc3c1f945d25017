#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "idlab/checkpoint.hpp"
#include "idlab/config.hpp"
#include "idlab/dataset_io.hpp"
#include "idlab/errors.hpp"
#include "idlab/experiment.hpp"
#include "idlab/grid.hpp"

namespace fs = std::filesystem;
using namespace idlab;

namespace {

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
  int parallelism = 1;
  bool resume = false;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (!c.seeds.empty()) cfg.seeds = parse_seed_list(c.seeds);
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

void print_summary(const ExperimentResult& r) {
  std::cout << "config " << r.config_hash << ", " << r.runs.size() << " seeds, " << r.failed() << " failed\n";
  for (const char* m : {"r2_latent_orth", "r2_latent_affine", "mae_singular_latent", "r2_cluster_orth",
                        "r2_cluster_affine", "weight_collapse", "beta", "posterior_mad"}) {
    MetricSummary s = r.summary(m);
    if (s.count > 0) std::cout << "  " << m << " = " << s.mean << " +- " << s.std << '\n';
  }
}

int cmd_generate(const Common& c) {
  ExperimentConfig cfg = load_config(c);
  fs::create_directories(cfg.output_dir);
  for (std::uint64_t seed : cfg.seeds) {
    DgpSpec spec = cfg.dgp;
    spec.seed = derive_seed_streams(cfg, seed).dgp;
    Dataset data = generate_dataset(spec);
    const fs::path path = fs::path(cfg.output_dir) / ("dataset-" + std::to_string(seed) + ".bin");
    save_dataset(data, path.string());
    write_dataset_sidecar(data, path.string());
    std::cout << "wrote " << path.string() << " (" << data.size() << " samples, diverse="
              << (is_diverse(data.clusters.vectors) ? "yes" : "no") << ")\n";
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& data_path) {
  ExperimentConfig cfg = load_config(c);
  const std::uint64_t seed = cfg.seeds.front();
  const SeedStreams streams = derive_seed_streams(cfg, seed);
  Dataset data;
  if (data_path.empty()) {
    DgpSpec spec = cfg.dgp;
    spec.seed = streams.dgp;
    data = generate_dataset(spec);
  } else {
    data = load_dataset(data_path);
  }
  TrainConfig tc = cfg.train;
  tc.seed = streams.train;
  TrainResult trained = train(data, tc);
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  save_checkpoint(trained.model, (dir / "model.ckpt").string());
  trained.trace.write_csv((dir / "trace.csv").string());
  std::cout << "loss " << trained.trace.initial_loss() << " -> " << trained.trace.final_loss() << ", wrote "
            << (dir / "model.ckpt").string() << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& data_path, const std::string& model_path) {
  ExperimentConfig cfg = load_config(c);
  Dataset data = load_dataset(data_path);
  Model model = load_checkpoint(model_path);
  const std::uint64_t seed = cfg.seeds.front();
  EvalReport report = evaluate(model, data, cfg.train.task, cfg.probe, derive_seed_streams(cfg, seed).probe);
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / "eval.csv";
  std::ofstream csv(path);
  csv << "artifact_version,config_hash,seed";
  for (const auto& n : EvalReport::metric_names()) csv << ',' << n;
  csv << '\n' << kArtifactVersion << ',' << config_hash(cfg) << ',' << seed;
  const std::vector<double> values = report.metric_values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv << ',' << format_double(values[i]);
    std::cout << EvalReport::metric_names()[i] << " = " << values[i] << '\n';
  }
  csv << '\n';
  for (const auto& note : report.notes) std::cout << "note: " << note << '\n';
  return 0;
}

int cmd_run(const Common& c, bool save_artifacts) {
  ExperimentConfig cfg = load_config(c);
  RunOptions ro;
  ro.parallelism = c.parallelism;
  ro.save_artifacts = save_artifacts;
  ro.log = &std::cerr;
  ExperimentResult r = run_experiment(cfg, ro);
  print_summary(r);
  for (const SeedRun& run : r.runs)
    if (!run.ok) std::cerr << "seed " << run.seed << " failed: " << run.error << '\n';
  return r.failed() == 0 ? 0 : 1;
}

int cmd_grid(const Common& c) {
  if (c.config.empty()) throw Error(Errc::invalid_config, "grid needs --config");
  GridSpec grid = grid_from_json(read_json_file(c.config));
  if (!c.seeds.empty()) grid.base.seeds = parse_seed_list(c.seeds);
  GridOptions go;
  go.output_dir = c.out;
  go.parallelism = c.parallelism;
  go.resume = c.resume;
  go.log = &std::cerr;
  GridResult r = run_grid(grid, go);
  std::cout << "wrote " << r.csv_path << " (" << r.cells.size() << " cells, " << r.failed_cells() << " failed)\n";
  return r.failed_cells() == 0 ? 0 : 1;
}

int cmd_reproduce(const Common& c, const std::vector<std::string>& tables, const std::string& manifest) {
  ReproduceOptions ro;
  if (!c.out.empty()) ro.output_dir = c.out;
  ro.manifest_path = manifest;
  ro.parallelism = c.parallelism;
  ro.resume = c.resume;
  if (!c.seeds.empty()) ro.seeds = parse_seed_list(c.seeds);
  ro.log = &std::cerr;
  bool ok = true;
  for (const std::string& name : tables) {
    ReproduceResult r = reproduce(repro_table_from_string(name), ro);
    std::cout << name << ": " << r.side_by_side_path << '\n';
    for (const ComparisonRow& row : r.rows)
      std::cout << "  " << (row.pass ? "pass" : "FAIL") << "  " << row.cell << "  " << row.metric << " = "
                << row.reproduced.mean << " +- " << row.reproduced.std << "  band [" << row.lo << ", " << row.hi
                << "]" << (row.published ? "  published " + format_double(*row.published) : "") << '\n';
    ok = ok && r.all_pass() && r.grid.failed_cells() == 0;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability experiments for instance discrimination on synthetic cluster-centric data"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--seeds", common.seeds, "Seed list, e.g. 0,1,2 or 0-4");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--parallelism", common.parallelism, "Concurrent workers")->check(CLI::PositiveNumber);
  };

  CLI::App* generate = app.add_subcommand("generate", "Sample datasets (one per seed)");
  add_common(generate);

  std::string data_path;
  std::string model_path;
  CLI::App* train_cmd = app.add_subcommand("train", "Train on a dataset (first seed)");
  add_common(train_cmd);
  train_cmd->add_option("--data", data_path, "Dataset file; generated from the config when omitted");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  add_common(eval_cmd);
  eval_cmd->add_option("--data", data_path, "Dataset file")->required();
  eval_cmd->add_option("--model", model_path, "Checkpoint file")->required();

  bool save_artifacts = false;
  CLI::App* run = app.add_subcommand("run", "Generate, train and evaluate every seed");
  add_common(run);
  run->add_flag("--save-artifacts", save_artifacts, "Keep dataset, checkpoint and trace per seed");

  CLI::App* grid = app.add_subcommand("grid", "Run a grid spec (JSON)");
  add_common(grid);
  grid->add_flag("--resume", common.resume, "Skip cells already completed in --out");

  std::vector<std::string> tables;
  std::string manifest;
  CLI::App* repro = app.add_subcommand("reproduce", "Run pre-registered table grids and compare against bands");
  add_common(repro);
  repro->add_flag("--resume", common.resume, "Skip cells already completed in --out");
  repro->add_option("--manifest", manifest, "Manifest path (default: the shipped manifest)");
  repro->add_option("tables", tables, "table1 table2 gen_normal label_noise heatmaps cluster_dist, or all")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(common);
    if (*train_cmd) return cmd_train(common, data_path);
    if (*eval_cmd) return cmd_eval(common, data_path, model_path);
    if (*run) return cmd_run(common, save_artifacts);
    if (*grid) return cmd_grid(common);
    if (*repro) {
      if (tables.size() == 1 && tables[0] == "all")
        tables = {"table1", "table2", "gen_normal", "label_noise", "heatmaps", "cluster_dist"};
      return cmd_reproduce(common, tables, manifest);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
