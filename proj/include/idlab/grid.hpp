#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idlab/config.hpp"
#include "idlab/experiment.hpp"

namespace idlab {

struct GridOptions {
  std::string output_dir;  // grid.csv and cells/ go here
  int parallelism = 1;     // cells run concurrently
  bool resume = false;     // reuse cells/<hash>.* from an earlier run
  std::ostream* log = nullptr;
};

struct CellResult {
  GridCell cell;
  ExperimentResult result;
  bool resumed = false;
  bool failed = false;  // a seed errored or the cell itself threw
  std::string error;
  double seconds = 0.0;  // wall time of this cell (0 when resumed)
};

struct GridResult {
  std::vector<CellResult> cells;
  std::string csv_path;

  const CellResult& cell(const std::string& label) const;
  int failed_cells() const;
};

std::string grid_csv_header();

/// Runs every cell of the expanded grid; a failing cell is marked and the
/// rest continue. Cells are keyed by config hash under <out>/cells, and the
/// final CSV is assembled in cell order, so an interrupted and resumed grid
/// produces the same bytes as an uninterrupted one.
GridResult run_grid(const GridSpec& grid, const GridOptions& options);

enum class ReproTable { table1, table2, gen_normal, label_noise, heatmaps, cluster_dist };

std::string to_string(ReproTable table);
ReproTable repro_table_from_string(const std::string& name);

/// One manifest row: a reproduced quantity set against the published value
/// and its acceptance band.
struct ComparisonRow {
  std::string cell;
  std::string metric;
  std::optional<double> published;
  double lo = 0.0;
  double hi = 0.0;
  MetricSummary reproduced;
  bool pass = false;
};

struct ReproduceOptions {
  std::string output_dir = "reproduce";
  std::string manifest_path;  // empty: the manifest shipped with the sources
  int parallelism = 1;
  bool resume = false;
  std::vector<std::uint64_t> seeds;  // empty: the manifest's seed list
  std::ostream* log = nullptr;
};

struct ReproduceResult {
  ReproTable table = ReproTable::table1;
  GridResult grid;
  std::vector<ComparisonRow> rows;
  std::string side_by_side_path;
  std::string plot_data_path;

  bool all_pass() const;
};

std::string default_manifest_path();
GridSpec manifest_grid(const Json& manifest, ReproTable table);

/// Runs the pre-registered grid for a published table or figure and writes
/// <out>/<table>/{grid.csv, side_by_side.csv, plot_data.csv}.
ReproduceResult reproduce(ReproTable table, const ReproduceOptions& options);

}  // namespace idlab
