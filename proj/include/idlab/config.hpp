#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idlab/dgp.hpp"
#include "idlab/eval.hpp"
#include "idlab/train.hpp"
#include "json.hpp"

namespace idlab {

using Json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "idlab-1.0.0";

/// One experiment: a DGP, a training recipe, probe settings and the seed list.
/// The dgp and train seeds act as base salts; every entry of `seeds` derives
/// its own dataset, initialization and probe streams from them.
struct ExperimentConfig {
  DgpSpec dgp;
  TrainConfig train;
  ProbeSettings probe;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

Json to_json(const SphericalConditional& cond);
Json to_json(const DgpSpec& spec);
Json to_json(const TrainConfig& config);
Json to_json(const ProbeSettings& settings);
Json to_json(const ExperimentConfig& config);

// Strict readers: unknown keys and wrong types raise invalid-config. Missing
// keys keep their defaults.
SphericalConditional conditional_from_json(const Json& j);
DgpSpec dgp_from_json(const Json& j);
TrainConfig train_from_json(const Json& j);
ProbeSettings probe_from_json(const Json& j);
ExperimentConfig experiment_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);
/// Human-readable DgpSpec written next to a dataset binary as <path>.json.
void write_dataset_sidecar(const Dataset& dataset, const std::string& dataset_path);

/// Parses and validates.
ExperimentConfig load_experiment_config(const std::string& path);

/// 16 hex digits over the canonical serialization of everything that affects
/// results (the output directory is excluded).
std::string config_hash(const ExperimentConfig& config);

/// Parses "0,1,2" or "0-4" (inclusive range) or a mix of both.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Base config plus variants (named override sets) crossed with cartesian axes.
/// Paths are dotted keys into the config's JSON form, e.g. "train.batch_size"
/// or "dgp.conditional"; the value at the path is replaced wholesale.
struct GridSpec {
  struct Axis {
    std::string path;
    std::vector<Json> values;
  };
  struct Variant {
    std::string label;
    Json overrides = Json::object();  // path -> value
  };

  std::string name;
  ExperimentConfig base;
  std::vector<Variant> variants;
  std::vector<Axis> axes;
};

struct GridCell {
  int index = 0;
  std::string label;
  ExperimentConfig config;
};

/// Variants (or the base alone) crossed with every axis, first axis slowest.
std::vector<GridCell> expand_grid(const GridSpec& grid);

Json to_json(const GridSpec& grid);
GridSpec grid_from_json(const Json& j);

}  // namespace idlab
