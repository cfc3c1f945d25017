#include "idlab/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_config, what); }

void expect_object(const Json& j, const char* where) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  expect_object(j, where);
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) bad("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& out, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) bad(std::string(where) + "." + key + " must be a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) bad(std::string(where) + "." + key + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned())
          bad(std::string(where) + "." + key + " must be non-negative");
      }
    }
    out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(std::string(where) + "." + key + ": " + e.what());
  }
}

std::string read_string(const Json& j, const char* key, const std::string& fallback, const char* where) {
  std::string out = fallback;
  read(j, key, out, where);
  return out;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) bad("empty segment in path '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) bad("empty path");
  return parts;
}

void set_path(Json& j, const std::string& path, const Json& value) {
  Json* node = &j;
  auto parts = split_path(path);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) bad("path '" + path + "' does not name a config field");
    node = &(*node)[parts[i]];
  }
  *node = value;
}

std::string value_label(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object() && v.contains("family")) {
    std::string out = v["family"].get<std::string>();
    for (const auto& item : v.items())
      if (item.key() != "family") out += " " + item.key() + "=" + item.value().dump();
    return out;
  }
  return v.dump();
}

// Odometer step over the axis positions, last axis fastest.
bool advance(std::vector<std::size_t>& pos, const std::vector<GridSpec::Axis>& axes) {
  for (std::size_t a = axes.size(); a-- > 0;) {
    if (++pos[a] < axes[a].values.size()) return true;
    pos[a] = 0;
  }
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  dgp.validate();
  if (seeds.empty()) bad("seed list must not be empty");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) bad("seed list has duplicates");
  if (train.epochs < 1) bad("epochs must be >= 1");
  if (train.batch_size < 1 || train.batch_size > dgp.num_samples) bad("batch_size must lie in [1, num_samples]");
  if (!(train.learning_rate > 0.0)) bad("learning rate must be > 0");
  if (probe.samples < 10) bad("probe.samples must be >= 10");
  if (!(probe.fit_fraction > 0.0 && probe.fit_fraction < 1.0)) bad("probe.fit_fraction must lie in (0, 1)");
}

Json to_json(const SphericalConditional& c) {
  Json j = {{"family", to_string(c.family)}};
  switch (c.family) {
    case ConditionalFamily::vmf: j["kappa"] = c.kappa; break;
    case ConditionalFamily::gen_normal:
      j["alpha"] = c.alpha;
      j["shape"] = c.shape;
      break;
    case ConditionalFamily::trunc_laplace:
      j["alpha"] = c.alpha;
      j["truncation"] = c.truncation.value_or(0.0);
      break;
  }
  return j;
}

SphericalConditional conditional_from_json(const Json& j) {
  expect_object(j, "conditional");
  std::string family = read_string(j, "family", "vmf", "conditional");
  SphericalConditional c;
  switch (conditional_family_from_string(family)) {
    case ConditionalFamily::vmf: {
      check_keys(j, {"family", "kappa"}, "conditional");
      double kappa = 10.0;
      read(j, "kappa", kappa, "conditional");
      c = SphericalConditional::vmf(kappa);
      break;
    }
    case ConditionalFamily::gen_normal: {
      check_keys(j, {"family", "alpha", "shape"}, "conditional");
      double alpha = 1.0, shape = 2.0;
      read(j, "alpha", alpha, "conditional");
      read(j, "shape", shape, "conditional");
      c = SphericalConditional::gen_normal(alpha, shape);
      break;
    }
    case ConditionalFamily::trunc_laplace: {
      check_keys(j, {"family", "alpha", "truncation"}, "conditional");
      double alpha = 1.0, truncation = 1.0;
      read(j, "alpha", alpha, "conditional");
      read(j, "truncation", truncation, "conditional");
      c = SphericalConditional::trunc_laplace(alpha, truncation);
      break;
    }
  }
  return c;
}

Json to_json(const DgpSpec& s) {
  return {{"latent_dim", s.latent_dim},
          {"obs_dim", s.obs_dim},
          {"num_samples", s.num_samples},
          {"num_classes", s.num_classes},
          {"conditional", to_json(s.conditional)},
          {"cluster_distribution", to_string(s.cluster_distribution)},
          {"generator",
           {{"depth", s.generator.depth},
            {"leaky_slope", s.generator.leaky_slope},
            {"condition_cap", s.generator.condition_cap}}},
          {"seed", s.seed}};
}

DgpSpec dgp_from_json(const Json& j) {
  check_keys(j,
             {"latent_dim", "obs_dim", "num_samples", "num_classes", "conditional", "cluster_distribution",
              "generator", "seed"},
             "dgp");
  DgpSpec s;
  read(j, "latent_dim", s.latent_dim, "dgp");
  read(j, "obs_dim", s.obs_dim, "dgp");
  read(j, "num_samples", s.num_samples, "dgp");
  read(j, "num_classes", s.num_classes, "dgp");
  if (j.contains("conditional")) s.conditional = conditional_from_json(j["conditional"]);
  s.cluster_distribution =
      cluster_distribution_from_string(read_string(j, "cluster_distribution", to_string(s.cluster_distribution), "dgp"));
  if (j.contains("generator")) {
    const Json& g = j["generator"];
    check_keys(g, {"depth", "leaky_slope", "condition_cap"}, "dgp.generator");
    read(g, "depth", s.generator.depth, "dgp.generator");
    read(g, "leaky_slope", s.generator.leaky_slope, "dgp.generator");
    read(g, "condition_cap", s.generator.condition_cap, "dgp.generator");
  }
  read(j, "seed", s.seed, "dgp");
  return s;
}

Json to_json(const TrainConfig& c) {
  return {{"task", to_string(c.task)},
          {"mode", c.mode.name()},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", to_string(c.optimizer)},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"sgd_momentum", c.sgd_momentum},
          {"label_noise_ratio", c.label_noise_ratio},
          {"label_noise_target", to_string(c.label_noise_target)},
          {"resample_latents", c.resample_latents},
          {"hidden_layers", c.hidden_layers},
          {"hidden_width", c.hidden_width},
          {"leaky_slope", c.leaky_slope},
          {"seed", c.seed}};
}

TrainConfig train_from_json(const Json& j) {
  check_keys(j,
             {"task", "mode", "epochs", "batch_size", "learning_rate", "optimizer", "adam_beta1", "adam_beta2",
              "adam_epsilon", "sgd_momentum", "label_noise_ratio", "label_noise_target", "resample_latents",
              "hidden_layers", "hidden_width", "leaky_slope", "seed"},
             "train");
  TrainConfig c;
  c.task = task_from_string(read_string(j, "task", to_string(c.task), "train"));
  c.mode = NormalizationMode::from_name(read_string(j, "mode", c.mode.name(), "train"));
  read(j, "epochs", c.epochs, "train");
  read(j, "batch_size", c.batch_size, "train");
  read(j, "learning_rate", c.learning_rate, "train");
  c.optimizer = optimizer_from_string(read_string(j, "optimizer", to_string(c.optimizer), "train"));
  read(j, "adam_beta1", c.adam_beta1, "train");
  read(j, "adam_beta2", c.adam_beta2, "train");
  read(j, "adam_epsilon", c.adam_epsilon, "train");
  read(j, "sgd_momentum", c.sgd_momentum, "train");
  read(j, "label_noise_ratio", c.label_noise_ratio, "train");
  c.label_noise_target =
      label_target_from_string(read_string(j, "label_noise_target", to_string(c.label_noise_target), "train"));
  read(j, "resample_latents", c.resample_latents, "train");
  read(j, "hidden_layers", c.hidden_layers, "train");
  read(j, "hidden_width", c.hidden_width, "train");
  read(j, "leaky_slope", c.leaky_slope, "train");
  read(j, "seed", c.seed, "train");
  return c;
}

Json to_json(const ProbeSettings& p) { return {{"samples", p.samples}, {"fit_fraction", p.fit_fraction}}; }

ProbeSettings probe_from_json(const Json& j) {
  check_keys(j, {"samples", "fit_fraction"}, "probe");
  ProbeSettings p;
  read(j, "samples", p.samples, "probe");
  read(j, "fit_fraction", p.fit_fraction, "probe");
  return p;
}

Json to_json(const ExperimentConfig& c) {
  return {{"dgp", to_json(c.dgp)},
          {"train", to_json(c.train)},
          {"probe", to_json(c.probe)},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  check_keys(j, {"dgp", "train", "probe", "seeds", "output_dir"}, "config");
  ExperimentConfig c;
  if (j.contains("dgp")) c.dgp = dgp_from_json(j["dgp"]);
  if (j.contains("train")) c.train = train_from_json(j["train"]);
  if (j.contains("probe")) c.probe = probe_from_json(j["probe"]);
  if (j.contains("seeds")) {
    const Json& s = j["seeds"];
    if (!s.is_array()) bad("seeds must be an array of non-negative integers");
    c.seeds.clear();
    for (const Json& v : s) {
      if (!v.is_number_unsigned()) bad("seeds must be an array of non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  c.output_dir = read_string(j, "output_dir", c.output_dir, "config");
  return c;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    bad(path + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_dataset_sidecar(const Dataset& dataset, const std::string& dataset_path) {
  Json j = {{"artifact_version", kArtifactVersion}, {"dgp", to_json(dataset.spec)}};
  write_json_file(j, dataset_path + ".json");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig c = experiment_from_json(read_json_file(path));
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = to_json(config);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) bad("bad seed '" + s + "' in '" + text + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
    } else {
      std::uint64_t lo = number(item.substr(0, dash));
      std::uint64_t hi = number(item.substr(dash + 1));
      if (hi < lo || hi - lo > 100000) bad("bad seed range '" + item + "'");
      for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  if (out.empty()) bad("empty seed list");
  return out;
}

std::vector<GridCell> expand_grid(const GridSpec& grid) {
  const Json base = to_json(grid.base);
  std::vector<GridSpec::Variant> variants = grid.variants;
  if (variants.empty()) variants.push_back({"base", Json::object()});

  std::vector<GridCell> cells;
  for (const auto& variant : variants) {
    Json vj = base;
    for (const auto& item : variant.overrides.items()) set_path(vj, item.key(), item.value());
    std::vector<std::size_t> pos(grid.axes.size(), 0);
    for (;;) {
      Json cj = vj;
      std::string label = variant.label;
      for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        const Json& v = grid.axes[a].values[pos[a]];
        set_path(cj, grid.axes[a].path, v);
        label += "/" + grid.axes[a].path + "=" + value_label(v);
      }
      GridCell cell;
      cell.index = static_cast<int>(cells.size());
      cell.label = label;
      cell.config = experiment_from_json(cj);
      cells.push_back(std::move(cell));
      if (!advance(pos, grid.axes)) break;
    }
  }
  return cells;
}

Json to_json(const GridSpec& grid) {
  Json j = {{"name", grid.name}, {"base", to_json(grid.base)}};
  Json variants = Json::array();
  for (const auto& v : grid.variants) variants.push_back({{"label", v.label}, {"overrides", v.overrides}});
  Json axes = Json::array();
  for (const auto& a : grid.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  j["variants"] = variants;
  j["axes"] = axes;
  return j;
}

GridSpec grid_from_json(const Json& j) {
  check_keys(j, {"name", "base", "variants", "axes"}, "grid");
  GridSpec g;
  g.name = read_string(j, "name", "", "grid");
  if (j.contains("base")) g.base = experiment_from_json(j["base"]);
  if (j.contains("variants")) {
    if (!j["variants"].is_array()) bad("grid.variants must be an array");
    std::set<std::string> labels;
    for (const Json& v : j["variants"]) {
      check_keys(v, {"label", "overrides"}, "grid.variants[]");
      GridSpec::Variant var;
      var.label = read_string(v, "label", "", "grid.variants[]");
      if (var.label.empty() || !labels.insert(var.label).second) bad("variant labels must be unique and non-empty");
      if (v.contains("overrides")) {
        expect_object(v["overrides"], "grid.variants[].overrides");
        var.overrides = v["overrides"];
      }
      g.variants.push_back(std::move(var));
    }
  }
  if (j.contains("axes")) {
    if (!j["axes"].is_array()) bad("grid.axes must be an array");
    for (const Json& a : j["axes"]) {
      check_keys(a, {"path", "values"}, "grid.axes[]");
      GridSpec::Axis axis;
      axis.path = read_string(a, "path", "", "grid.axes[]");
      split_path(axis.path);
      if (!a.contains("values") || !a["values"].is_array() || a["values"].empty())
        bad("axis '" + axis.path + "' needs a non-empty value list");
      for (const Json& v : a["values"]) axis.values.push_back(v);
      g.axes.push_back(std::move(axis));
    }
  }
  return g;
}

}  // namespace idlab
