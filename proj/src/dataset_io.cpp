#include "idlab/dataset_io.hpp"

#include <array>

#include "binary_io.hpp"

namespace idlab {
namespace {

constexpr std::array<char, 8> kMagic = {'I', 'D', 'L', 'D', 'A', 'T', 'A', '\0'};

void write_matrix(detail::BinaryWriter& w, const Matrix& m) {
  w.value<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
  w.value<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
  w.array(m.data(), static_cast<std::size_t>(m.size()));
}

Matrix read_matrix(detail::BinaryReader& r) {
  auto rows = r.value<std::uint32_t>();
  auto cols = r.value<std::uint32_t>();
  if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 32)) throw Error(Errc::io, "corrupt matrix shape");
  Matrix m(rows, cols);
  r.array(m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

void write_labels(detail::BinaryWriter& w, const std::vector<Label>& labels) {
  w.value<std::uint32_t>(static_cast<std::uint32_t>(labels.size()));
  w.array(labels.data(), labels.size());
}

std::vector<Label> read_labels(detail::BinaryReader& r) {
  auto n = r.value<std::uint32_t>();
  std::vector<Label> out(n);
  r.array(out.data(), out.size());
  return out;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  detail::BinaryWriter w(path);
  w.bytes(kMagic.data(), kMagic.size());
  w.value<std::uint32_t>(kDatasetVersion);

  const DgpSpec& s = ds.spec;
  w.value<std::int32_t>(s.latent_dim);
  w.value<std::int32_t>(s.obs_dim);
  w.value<std::int32_t>(s.num_samples);
  w.value<std::int32_t>(s.num_classes);
  w.value<std::uint8_t>(static_cast<std::uint8_t>(s.conditional.family));
  w.value<double>(s.conditional.kappa);
  w.value<double>(s.conditional.alpha);
  w.value<double>(s.conditional.shape);
  w.value<std::uint8_t>(s.conditional.truncation ? 1 : 0);
  w.value<double>(s.conditional.truncation.value_or(0.0));
  w.value<std::uint8_t>(static_cast<std::uint8_t>(s.cluster_distribution));
  w.value<std::uint64_t>(s.seed);

  const GeneratorSpec& g = ds.generator.spec();
  w.value<std::int32_t>(g.depth);
  w.value<std::int32_t>(g.latent_dim);
  w.value<std::int32_t>(g.obs_dim);
  w.value<double>(g.leaky_slope);
  w.value<double>(g.condition_cap);
  w.value<std::uint64_t>(g.seed);
  w.value<std::uint32_t>(static_cast<std::uint32_t>(ds.generator.layers().size()));
  for (const Matrix& layer : ds.generator.layers()) write_matrix(w, layer);
  write_matrix(w, ds.generator.embedding());

  write_matrix(w, ds.clusters.matrix());
  w.value<std::int32_t>(ds.class_function.num_classes);
  write_labels(w, ds.class_function.classes);
  write_labels(w, ds.instance_labels);
  write_labels(w, ds.class_labels);
  write_labels(w, ds.clean_instance_labels);
  write_labels(w, ds.clean_class_labels);
  write_matrix(w, ds.z);
  write_matrix(w, ds.x);
}

Dataset load_dataset(const std::string& path) {
  detail::BinaryReader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw Error(Errc::io, path + " is not a dataset file");
  auto version = r.value<std::uint32_t>();
  if (version != kDatasetVersion) throw Error(Errc::io, "unsupported dataset version " + std::to_string(version));

  Dataset ds;
  DgpSpec& s = ds.spec;
  s.latent_dim = r.value<std::int32_t>();
  s.obs_dim = r.value<std::int32_t>();
  s.num_samples = r.value<std::int32_t>();
  s.num_classes = r.value<std::int32_t>();
  auto family = r.value<std::uint8_t>();
  if (family > static_cast<std::uint8_t>(ConditionalFamily::trunc_laplace)) throw Error(Errc::io, "corrupt conditional");
  s.conditional.family = static_cast<ConditionalFamily>(family);
  s.conditional.kappa = r.value<double>();
  s.conditional.alpha = r.value<double>();
  s.conditional.shape = r.value<double>();
  bool has_truncation = r.value<std::uint8_t>() != 0;
  double truncation = r.value<double>();
  if (has_truncation) s.conditional.truncation = truncation;
  auto dist = r.value<std::uint8_t>();
  if (dist > static_cast<std::uint8_t>(ClusterDistribution::normal_projected))
    throw Error(Errc::io, "corrupt cluster distribution");
  s.cluster_distribution = static_cast<ClusterDistribution>(dist);
  s.seed = r.value<std::uint64_t>();

  GeneratorSpec& g = s.generator;
  g.depth = r.value<std::int32_t>();
  g.latent_dim = r.value<std::int32_t>();
  g.obs_dim = r.value<std::int32_t>();
  g.leaky_slope = r.value<double>();
  g.condition_cap = r.value<double>();
  g.seed = r.value<std::uint64_t>();
  auto n_layers = r.value<std::uint32_t>();
  if (n_layers > 1024) throw Error(Errc::io, "corrupt generator depth");
  std::vector<Matrix> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) layers.push_back(read_matrix(r));
  Matrix embedding = read_matrix(r);
  ds.generator = Generator(g, std::move(layers), std::move(embedding));

  Matrix clusters = read_matrix(r);
  ds.clusters.distribution = s.cluster_distribution;
  for (Eigen::Index c = 0; c < clusters.rows(); ++c)
    ds.clusters.vectors.push_back(UnitVector::from(clusters.row(c).transpose()));
  ds.class_function.num_classes = r.value<std::int32_t>();
  ds.class_function.classes = read_labels(r);
  ds.instance_labels = read_labels(r);
  ds.class_labels = read_labels(r);
  ds.clean_instance_labels = read_labels(r);
  ds.clean_class_labels = read_labels(r);
  ds.z = read_matrix(r);
  ds.x = read_matrix(r);
  if (!r.at_end()) throw Error(Errc::io, "trailing bytes in dataset file");
  if (ds.z.rows() != s.num_samples || ds.x.rows() != s.num_samples ||
      static_cast<int>(ds.instance_labels.size()) != s.num_samples)
    throw Error(Errc::io, "dataset arrays disagree with the header");
  return ds;
}

}  // namespace idlab
