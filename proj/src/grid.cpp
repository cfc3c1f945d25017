#include "idlab/grid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "idlab/errors.hpp"

namespace fs = std::filesystem;

namespace idlab {
namespace {

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

bool load_cell(const fs::path& dir, const std::string& hash, ExperimentResult& result) {
  const fs::path seeds = dir / (hash + ".seeds.csv");
  const fs::path aggregate = dir / (hash + ".aggregate.csv");
  if (!fs::exists(seeds) || !fs::exists(aggregate)) return false;
  std::vector<SeedRun> runs = read_seed_csv(seeds.string(), hash);
  if (runs.size() != result.config.seeds.size()) return false;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (!runs[i].ok || runs[i].seed != result.config.seeds[i]) return false;
  result.runs = std::move(runs);
  return true;
}

Json value_at(const Json& j, const std::string& path) {
  const Json* node = &j;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) throw Error(Errc::invalid_config, "no config field '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *node;
}

std::string plot_coordinate(const CellResult& cell, const std::string& path) {
  if (path.empty() || path == "label") return csv_safe(cell.cell.label);
  Json v = value_at(to_json(cell.cell.config), path);
  return csv_safe(v.is_string() ? v.get<std::string>() : v.dump());
}

}  // namespace

const CellResult& GridResult::cell(const std::string& label) const {
  for (const CellResult& c : cells)
    if (c.cell.label == label) return c;
  throw Error(Errc::invalid_input, "no grid cell labelled '" + label + "'");
}

int GridResult::failed_cells() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return c.failed; }));
}

std::string grid_csv_header() {
  std::string h = aggregate_csv_header();
  // artifact_version,config_hash,... -> artifact_version,cell,label,config_hash,...
  return "artifact_version,cell,label" + h.substr(h.find(','));
}

GridResult run_grid(const GridSpec& grid, const GridOptions& options) {
  std::vector<GridCell> cells = expand_grid(grid);
  if (cells.empty()) throw Error(Errc::invalid_config, "grid expands to no cells");
  const fs::path out = options.output_dir.empty() ? fs::path(grid.base.output_dir) : fs::path(options.output_dir);
  const fs::path cell_dir = out / "cells";
  fs::create_directories(cell_dir);
  if (options.log)
    *options.log << "grid " << (grid.name.empty() ? "(unnamed)" : grid.name) << ": " << cells.size() << " cells\n";

  GridResult result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult& cr = result.cells[i];
      cr.cell = cells[i];
      cr.result.config = cr.cell.config;
      cr.result.config_hash = config_hash(cr.cell.config);
      const std::string& hash = cr.result.config_hash;
      const auto start = std::chrono::steady_clock::now();
      try {
        if (options.resume && load_cell(cell_dir, hash, cr.result)) {
          cr.resumed = true;
        } else {
          RunOptions ro;
          ro.write_outputs = false;
          cr.result = run_experiment(cr.cell.config, ro);
          write_seed_csv(cr.result, (cell_dir / (hash + ".seeds.csv")).string());
          write_aggregate_csv(cr.result, (cell_dir / (hash + ".aggregate.csv")).string());
        }
        cr.failed = cr.result.failed() > 0;
        if (cr.failed)
          for (const SeedRun& r : cr.result.runs)
            if (!r.ok) {
              cr.error = "seed " + std::to_string(r.seed) + ": " + r.error;
              break;
            }
      } catch (const std::exception& e) {
        cr.failed = true;
        cr.error = e.what();
      }
      if (!cr.resumed) cr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (options.log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *options.log << "  [" << (i + 1) << "/" << cells.size() << "] " << cr.cell.label << " " << hash
                     << (cr.resumed ? " (resumed)" : "") << (cr.failed ? " FAILED: " + cr.error : "") << '\n';
      }
    }
  };
  const int threads = std::clamp(options.parallelism, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.csv_path = (out / "grid.csv").string();
  std::ofstream csv(result.csv_path);
  if (!csv) throw Error(Errc::io, "cannot write " + result.csv_path);
  csv << grid_csv_header() << '\n';
  for (const CellResult& cr : result.cells) {
    std::string row = aggregate_csv_row(cr.result);
    std::size_t comma = row.find(',');
    csv << row.substr(0, comma) << ',' << cr.cell.index << ',' << csv_safe(cr.cell.label) << row.substr(comma) << '\n';
  }
  return result;
}

std::string to_string(ReproTable table) {
  switch (table) {
    case ReproTable::table1: return "table1";
    case ReproTable::table2: return "table2";
    case ReproTable::gen_normal: return "gen_normal";
    case ReproTable::label_noise: return "label_noise";
    case ReproTable::heatmaps: return "heatmaps";
    case ReproTable::cluster_dist: return "cluster_dist";
  }
  return "unknown";
}

ReproTable repro_table_from_string(const std::string& name) {
  for (ReproTable t : {ReproTable::table1, ReproTable::table2, ReproTable::gen_normal, ReproTable::label_noise,
                       ReproTable::heatmaps, ReproTable::cluster_dist})
    if (to_string(t) == name) return t;
  throw Error(Errc::invalid_config, "unknown table '" + name + "'");
}

bool ReproduceResult::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
}

std::string default_manifest_path() { return std::string(IDLAB_MANIFEST_DIR) + "/reproduce.json"; }

namespace {

const Json& manifest_entry(const Json& manifest, ReproTable table) {
  if (!manifest.contains("tables") || !manifest["tables"].contains(to_string(table)))
    throw Error(Errc::invalid_config, "manifest has no entry for " + to_string(table));
  return manifest["tables"][to_string(table)];
}

}  // namespace

GridSpec manifest_grid(const Json& manifest, ReproTable table) {
  return grid_from_json(manifest_entry(manifest, table).at("grid"));
}

ReproduceResult reproduce(ReproTable table, const ReproduceOptions& options) {
  const Json manifest = read_json_file(options.manifest_path.empty() ? default_manifest_path() : options.manifest_path);
  const Json& entry = manifest_entry(manifest, table);
  GridSpec grid = grid_from_json(entry.at("grid"));
  if (!options.seeds.empty()) grid.base.seeds = options.seeds;

  const fs::path out = fs::path(options.output_dir) / to_string(table);
  GridOptions go;
  go.output_dir = out.string();
  go.parallelism = options.parallelism;
  go.resume = options.resume;
  go.log = options.log;

  ReproduceResult result;
  result.table = table;
  result.grid = run_grid(grid, go);

  for (const Json& row : entry.value("rows", Json::array())) {
    ComparisonRow cr;
    cr.cell = row.at("cell").get<std::string>();
    cr.metric = row.at("metric").get<std::string>();
    if (row.contains("published") && row["published"].is_number()) cr.published = row["published"].get<double>();
    const Json& band = row.at("band");
    cr.lo = band.at(0).get<double>();
    cr.hi = band.at(1).get<double>();
    const CellResult& cell = result.grid.cell(cr.cell);
    cr.reproduced = cell.result.summary(cr.metric);
    cr.pass = !cell.failed && cr.reproduced.count > 0 && cr.reproduced.mean >= cr.lo && cr.reproduced.mean <= cr.hi;
    result.rows.push_back(cr);
  }

  result.side_by_side_path = (out / "side_by_side.csv").string();
  {
    std::ofstream csv(result.side_by_side_path);
    if (!csv) throw Error(Errc::io, "cannot write " + result.side_by_side_path);
    csv << "artifact_version,cell,metric,published,reproduced_mean,reproduced_std,n,band_lo,band_hi,pass\n";
    for (const ComparisonRow& r : result.rows)
      csv << kArtifactVersion << ',' << csv_safe(r.cell) << ',' << r.metric << ','
          << (r.published ? format_double(*r.published) : "") << ',' << format_double(r.reproduced.mean) << ','
          << format_double(r.reproduced.std) << ',' << r.reproduced.count << ',' << format_double(r.lo) << ','
          << format_double(r.hi) << ',' << (r.pass ? "pass" : "fail") << '\n';
  }

  result.plot_data_path = (out / "plot_data.csv").string();
  {
    std::ofstream csv(result.plot_data_path);
    if (!csv) throw Error(Errc::io, "cannot write " + result.plot_data_path);
    csv << "metric,x,y,y_std,series\n";
    for (const Json& plot : entry.value("plots", Json::array())) {
      const std::string metric = plot.at("metric").get<std::string>();
      const std::string x = plot.value("x", "label");
      const std::string series = plot.value("series", "");
      for (const CellResult& cell : result.grid.cells) {
        MetricSummary s = cell.result.summary(metric);
        csv << metric << ',' << plot_coordinate(cell, x) << ',' << format_double(s.mean) << ','
            << format_double(s.std) << ',' << (series.empty() ? metric : plot_coordinate(cell, series)) << '\n';
      }
    }
  }
  return result;
}

}  // namespace idlab
