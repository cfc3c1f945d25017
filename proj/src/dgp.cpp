#include "idlab/dgp.hpp"

#include <algorithm>
#include <cmath>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

constexpr double kRankTolerance = 1e-8;

enum StreamTag : std::uint64_t {
  kClusterStream = 1,
  kLabelStream = 2,
  kLatentStream = 3,
  kGeneratorStream = 4,
};

Matrix leaky(const Matrix& m, double slope) {
  return m.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix leaky_inverse(const Matrix& m, double slope) {
  return m.unaryExpr([slope](double v) { return v > 0.0 ? v : v / slope; });
}

// (A^T)^{-1}, so that (h A^T) (A^T)^{-1} = h.
Matrix transposed_inverse(const Matrix& a) {
  Eigen::MatrixXd at = a.transpose();
  return Matrix(Eigen::FullPivLU<Eigen::MatrixXd>(at).inverse());
}

}  // namespace

std::string to_string(ClusterDistribution dist) {
  switch (dist) {
    case ClusterDistribution::uniform: return "uniform";
    case ClusterDistribution::laplace_projected: return "laplace_projected";
    case ClusterDistribution::normal_projected: return "normal_projected";
  }
  return "?";
}

ClusterDistribution cluster_distribution_from_string(const std::string& name) {
  if (name == "uniform") return ClusterDistribution::uniform;
  if (name == "laplace_projected") return ClusterDistribution::laplace_projected;
  if (name == "normal_projected") return ClusterDistribution::normal_projected;
  throw Error(Errc::invalid_config, "unknown cluster distribution '" + name + "'");
}

std::string to_string(LabelTarget target) {
  return target == LabelTarget::instance ? "instance" : "class";
}

LabelTarget label_target_from_string(const std::string& name) {
  if (name == "instance") return LabelTarget::instance;
  if (name == "class") return LabelTarget::class_label;
  throw Error(Errc::invalid_config, "unknown label target '" + name + "'");
}

Matrix ClusterSystem::matrix() const {
  Matrix m(size(), dim());
  for (int c = 0; c < size(); ++c) m.row(c) = vectors[static_cast<std::size_t>(c)].coords().transpose();
  return m;
}

bool is_affine_generator(const std::vector<UnitVector>& vectors) {
  if (vectors.empty()) throw Error(Errc::invalid_input, "empty vector system");
  const int d = vectors.front().dim();
  if (static_cast<int>(vectors.size()) < d + 1) return false;
  Matrix diffs(static_cast<Eigen::Index>(vectors.size() - 1), d);
  for (std::size_t c = 1; c < vectors.size(); ++c)
    diffs.row(static_cast<Eigen::Index>(c - 1)) = (vectors[c].coords() - vectors[0].coords()).transpose();
  return numerical_rank(diffs, kRankTolerance) == d;
}

bool is_diverse(const std::vector<UnitVector>& vectors) {
  if (vectors.empty()) throw Error(Errc::invalid_input, "empty vector system");
  const int d = vectors.front().dim();
  if (static_cast<int>(vectors.size()) < 2 * d) return false;
  Matrix m(static_cast<Eigen::Index>(vectors.size()), 2 * d);
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    const Vector& v = vectors[c].coords();
    auto row = static_cast<Eigen::Index>(c);
    m.row(row).head(d) = v.array().square().matrix().transpose();
    m.row(row).tail(d) = v.transpose();
  }
  return numerical_rank(m, kRankTolerance) == 2 * d;
}

ClusterSystem make_cluster_system(int count, int d, ClusterDistribution distribution, RngStream& rng) {
  if (d < 2) throw Error(Errc::invalid_dimension, "cluster dimension must be >= 2");
  if (count < d + 1)
    throw Error(Errc::infeasible_system, std::to_string(count) + " cluster vectors cannot affinely generate R^" +
                                             std::to_string(d));
  for (int attempt = 0; attempt < kClusterRedraws; ++attempt) {
    ClusterSystem sys;
    sys.distribution = distribution;
    sys.vectors.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
      if (distribution == ClusterDistribution::uniform) {
        sys.vectors.push_back(sample_uniform_sphere(d, rng));
        continue;
      }
      Vector v(d);
      do {
        for (int k = 0; k < d; ++k)
          v(k) = distribution == ClusterDistribution::laplace_projected ? rng.laplace() : rng.normal();
      } while (v.squaredNorm() < 1e-300);
      sys.vectors.push_back(UnitVector::normalized(v));
    }
    if (is_affine_generator(sys.vectors)) return sys;
  }
  throw Error(Errc::degenerate_system, "no affine generator system after " +
                                           std::to_string(kClusterRedraws) + " draws");
}

Generator::Generator(GeneratorSpec spec, std::vector<Matrix> layers, Matrix embedding)
    : spec_(spec), layers_(std::move(layers)), embedding_(std::move(embedding)) {}

Matrix Generator::apply(const Matrix& z) const {
  if (z.cols() != spec_.latent_dim) throw Error(Errc::width_mismatch, "generator input width");
  Matrix h = z;
  if (spec_.depth == 0) {
    h = h * layers_.front().transpose();
  } else {
    for (const Matrix& a : layers_) h = leaky(h * a.transpose(), spec_.leaky_slope);
  }
  if (embedding_.size() != 0) h = h * embedding_;
  return h;
}

Matrix Generator::invert(const Matrix& x) const {
  if (x.cols() != obs_dim()) throw Error(Errc::width_mismatch, "generator output width");
  Matrix h = embedding_.size() != 0 ? Matrix(x * embedding_.transpose()) : x;
  if (spec_.depth == 0) return h * transposed_inverse(layers_.front());
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    h = leaky_inverse(h, spec_.leaky_slope) * transposed_inverse(*it);
  return h;
}

Generator build_generator(const GeneratorSpec& spec) {
  const int d = spec.latent_dim;
  const int obs = spec.obs_dim == 0 ? d : spec.obs_dim;
  if (d < 2) throw Error(Errc::invalid_dimension, "generator latent dim must be >= 2");
  if (obs < d) throw Error(Errc::invalid_config, "observation dim must be >= latent dim");
  if (spec.depth < 0) throw Error(Errc::invalid_config, "generator depth must be >= 0");
  if (!(spec.leaky_slope > 0.0 && spec.leaky_slope < 1.0))
    throw Error(Errc::invalid_config, "leaky slope must lie in (0, 1)");
  if (!(spec.condition_cap > 1.0))
    throw Error(Errc::conditioning, "condition cap must exceed 1");

  RngStream rng(spec.seed);
  const int count = std::max(spec.depth, 1);
  std::vector<Matrix> layers;
  layers.reserve(static_cast<std::size_t>(count));
  const double log_cap = std::log(spec.condition_cap);
  for (int l = 0; l < count; ++l) {
    bool ok = false;
    for (int attempt = 0; attempt < kConditioningRetries && !ok; ++attempt) {
      // U diag(s) V^T with log-uniform s in [1, cap]; the check below guards
      // against rounding pushing the realized condition number past the cap.
      Matrix u = random_orthogonal(d, rng);
      Matrix v = random_orthogonal(d, rng);
      Vector s(d);
      for (int k = 0; k < d; ++k) s(k) = std::exp(log_cap * rng.uniform());
      Matrix a = u * s.asDiagonal() * v.transpose();
      if (condition_number(a) <= spec.condition_cap) {
        layers.push_back(std::move(a));
        ok = true;
      }
    }
    if (!ok)
      throw Error(Errc::conditioning, "could not draw a layer with condition number <= " +
                                          std::to_string(spec.condition_cap));
  }
  Matrix embedding;
  if (obs > d) {
    Matrix q = random_orthogonal(obs, rng);
    embedding = q.topRows(d);  // d x D, orthonormal rows
  }
  return Generator(spec, std::move(layers), std::move(embedding));
}

void DgpSpec::validate() const {
  if (latent_dim < 2) throw Error(Errc::invalid_dimension, "latent_dim must be >= 2");
  if (obs_dim != 0 && obs_dim < latent_dim) throw Error(Errc::invalid_config, "obs_dim must be >= latent_dim");
  if (num_samples < 1) throw Error(Errc::invalid_config, "num_samples must be >= 1");
  if (num_classes < latent_dim + 1)
    throw Error(Errc::infeasible_system, "num_classes must be >= latent_dim + 1");
  if (num_samples < num_classes)
    throw Error(Errc::infeasible_system, "num_samples must be >= num_classes for a surjective class function");
  conditional.validate();
}

bool ClassFunction::is_surjective() const {
  std::vector<char> used(static_cast<std::size_t>(num_classes), 0);
  for (Label c : classes) {
    if (c < 0 || c >= num_classes) return false;
    used[static_cast<std::size_t>(c)] = 1;
  }
  return std::all_of(used.begin(), used.end(), [](char u) { return u != 0; });
}

std::vector<std::vector<Label>> ClassFunction::members() const {
  std::vector<std::vector<Label>> out(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < classes.size(); ++i)
    out[static_cast<std::size_t>(classes[i])].push_back(static_cast<Label>(i));
  return out;
}

ClassFunction assign_classes(int num_instances, int num_classes, RngStream& rng) {
  if (num_instances < num_classes)
    throw Error(Errc::infeasible_system, "fewer instances than classes");
  ClassFunction f;
  f.num_classes = num_classes;
  f.classes.resize(static_cast<std::size_t>(num_instances));
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (auto& c : f.classes) c = static_cast<Label>(rng.below(static_cast<std::uint64_t>(num_classes)));
    if (f.is_surjective()) return f;
  }
  for (int i = 0; i < num_instances; ++i)
    f.classes[static_cast<std::size_t>(i)] =
        i < num_classes ? i : static_cast<Label>(rng.below(static_cast<std::uint64_t>(num_classes)));
  rng.shuffle(f.classes.begin(), f.classes.end());
  return f;
}

Matrix sample_latents(const ClusterSystem& clusters, const SphericalConditional& cond,
                      const std::vector<Label>& latent_classes, const RngStream& rng) {
  Matrix z(static_cast<Eigen::Index>(latent_classes.size()), clusters.dim());
  for (std::size_t n = 0; n < latent_classes.size(); ++n) {
    RngStream local = rng.split(n);
    const UnitVector& mu = clusters.vectors.at(static_cast<std::size_t>(latent_classes[n]));
    z.row(static_cast<Eigen::Index>(n)) = sample_spherical_conditional(mu, cond, local).coords().transpose();
  }
  return z;
}

Dataset generate_dataset(const DgpSpec& spec, RngStream& rng) {
  spec.validate();
  RngStream cluster_rng = rng.split(kClusterStream);
  RngStream label_rng = rng.split(kLabelStream);
  RngStream latent_rng = rng.split(kLatentStream);

  Dataset ds;
  ds.spec = spec;
  ds.spec.generator.latent_dim = spec.latent_dim;
  ds.spec.generator.obs_dim = spec.obs_dim;
  ds.spec.generator.seed = rng.split(kGeneratorStream).next_u64();

  ds.clusters = make_cluster_system(spec.num_classes, spec.latent_dim, spec.cluster_distribution, cluster_rng);
  ds.class_function = assign_classes(spec.num_samples, spec.num_classes, label_rng);
  ds.generator = build_generator(ds.spec.generator);

  const auto n = static_cast<std::size_t>(spec.num_samples);
  ds.instance_labels.resize(n);
  ds.class_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.instance_labels[i] = static_cast<Label>(i);
    ds.class_labels[i] = ds.class_function.classes[i];
  }
  ds.clean_instance_labels = ds.instance_labels;
  ds.clean_class_labels = ds.class_labels;
  ds.z = sample_latents(ds.clusters, spec.conditional, ds.class_labels, latent_rng);
  ds.x = ds.generator.apply(ds.z);
  return ds;
}

Dataset generate_dataset(const DgpSpec& spec) {
  RngStream rng(spec.seed);
  return generate_dataset(spec, rng);
}

Dataset inject_label_noise(const Dataset& dataset, double ratio, LabelTarget target, RngStream& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error(Errc::invalid_parameter, "noise ratio must lie in [0, 1]");
  Dataset out = dataset;
  if (ratio == 0.0) return out;
  std::vector<Label>& labels = target == LabelTarget::instance ? out.instance_labels : out.class_labels;
  const auto space = static_cast<std::uint64_t>(
      target == LabelTarget::instance ? dataset.class_function.num_instances() : dataset.spec.num_classes);
  for (auto& label : labels) {
    if (rng.uniform() < ratio) label = static_cast<Label>(rng.below(space));
  }
  return out;
}

Matrix vmf_class_posterior(const ClusterSystem& clusters, double kappa, const Matrix& z) {
  Matrix logits = kappa * (z * clusters.matrix().transpose());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double m = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - m).exp();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

}  // namespace idlab
