#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idlab/linalg.hpp"
#include "idlab/rng.hpp"
#include "idlab/sphere.hpp"

namespace idlab {

enum class ClusterDistribution { uniform, laplace_projected, normal_projected };

std::string to_string(ClusterDistribution dist);
ClusterDistribution cluster_distribution_from_string(const std::string& name);

struct ClusterSystem {
  std::vector<UnitVector> vectors;
  ClusterDistribution distribution = ClusterDistribution::uniform;

  int size() const { return static_cast<int>(vectors.size()); }
  int dim() const { return vectors.empty() ? 0 : vectors.front().dim(); }
  /// |C| x d matrix of the cluster vectors.
  Matrix matrix() const;
};

/// True iff {v_c - v_0} has rank d (rank tolerance 1e-8 relative to sigma_max).
bool is_affine_generator(const std::vector<UnitVector>& vectors);

/// True iff the |C| x 2d matrix with rows [(v_c .* v_c)^T, v_c^T] has rank 2d.
bool is_diverse(const std::vector<UnitVector>& vectors);

inline constexpr int kClusterRedraws = 100;

ClusterSystem make_cluster_system(int count, int d, ClusterDistribution distribution, RngStream& rng);

struct GeneratorSpec {
  int depth = 3;
  int latent_dim = 0;
  int obs_dim = 0;  // 0 means obs_dim = latent_dim
  double leaky_slope = 0.2;
  double condition_cap = 3.0;
  std::uint64_t seed = 0;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Injective map g: R^d -> R^D. `depth` blocks of (square matrix with
/// condition number <= cap, leaky rectifier), or one conditioned linear map
/// when depth = 0, then a fixed orthonormal-column embedding when D > d.
class Generator {
 public:
  Generator() = default;
  Generator(GeneratorSpec spec, std::vector<Matrix> layers, Matrix embedding);

  /// Rows of z (N x d) to rows of x (N x D).
  Matrix apply(const Matrix& z) const;
  /// Exact inverse on the image of apply().
  Matrix invert(const Matrix& x) const;

  const GeneratorSpec& spec() const { return spec_; }
  const std::vector<Matrix>& layers() const { return layers_; }
  const Matrix& embedding() const { return embedding_; }
  int latent_dim() const { return spec_.latent_dim; }
  int obs_dim() const { return spec_.obs_dim == 0 ? spec_.latent_dim : spec_.obs_dim; }

 private:
  GeneratorSpec spec_;
  std::vector<Matrix> layers_;  // applied as h <- act(h A^T)
  Matrix embedding_;            // d x D with orthonormal rows, empty when D = d
};

inline constexpr int kConditioningRetries = 100;

Generator build_generator(const GeneratorSpec& spec);

/// Complete description of the data generating process.
struct DgpSpec {
  int latent_dim = 5;
  int obs_dim = 0;  // 0 means obs_dim = latent_dim
  int num_samples = 1000;
  int num_classes = 100;
  SphericalConditional conditional = SphericalConditional::vmf(10.0);
  ClusterDistribution cluster_distribution = ClusterDistribution::uniform;
  GeneratorSpec generator;
  std::uint64_t seed = 0;

  int observation_dim() const { return obs_dim == 0 ? latent_dim : obs_dim; }
  /// Throws invalid-config / infeasible-system on inconsistent specs.
  void validate() const;

  bool operator==(const DgpSpec&) const = default;
};

using Label = std::int32_t;

/// Class function C: instance label -> class label.
struct ClassFunction {
  std::vector<Label> classes;  // indexed by instance label
  int num_classes = 0;

  Label operator()(Label instance) const { return classes.at(static_cast<std::size_t>(instance)); }
  int num_instances() const { return static_cast<int>(classes.size()); }
  bool is_surjective() const;
  /// Instances grouped by class.
  std::vector<std::vector<Label>> members() const;
};

enum class LabelTarget { instance, class_label };

std::string to_string(LabelTarget target);
LabelTarget label_target_from_string(const std::string& name);

struct Dataset {
  DgpSpec spec;
  Matrix z;  // N x d
  Matrix x;  // N x D
  std::vector<Label> instance_labels;
  std::vector<Label> class_labels;
  // Labels before any noise injection. The latent of sample n is always drawn
  // around the cluster vector of clean_class_labels[n].
  std::vector<Label> clean_instance_labels;
  std::vector<Label> clean_class_labels;
  ClassFunction class_function;
  ClusterSystem clusters;
  Generator generator;

  int size() const { return static_cast<int>(z.rows()); }
};

/// Surjective class assignment for n instances: uniform draws, re-drawn
/// until every class is used. Falls back to a shuffled one-per-class seeding
/// when uniform re-draws keep failing (e.g. n close to the class count).
ClassFunction assign_classes(int num_instances, int num_classes, RngStream& rng);

Dataset generate_dataset(const DgpSpec& spec, RngStream& rng);
/// Same, seeded from spec.seed.
Dataset generate_dataset(const DgpSpec& spec);

/// Fresh latents for the given latent classes, one per entry; entry k uses
/// rng.split(k) so batches are reproducible independent of ordering.
Matrix sample_latents(const ClusterSystem& clusters, const SphericalConditional& cond,
                      const std::vector<Label>& latent_classes, const RngStream& rng);

Dataset inject_label_noise(const Dataset& dataset, double ratio, LabelTarget target, RngStream& rng);

/// True class posterior P(c | z) = softmax_c(kappa <v_c, z>) for rows of z.
Matrix vmf_class_posterior(const ClusterSystem& clusters, double kappa, const Matrix& z);

}  // namespace idlab
