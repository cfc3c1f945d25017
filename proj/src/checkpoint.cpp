#include "idlab/checkpoint.hpp"

#include <array>
#include <cstring>

#include "binary_io.hpp"

namespace idlab {
namespace {
constexpr std::array<char, 8> kMagic = {'I', 'D', 'L', 'C', 'K', 'P', 'T', '\0'};
}

void save_checkpoint(const Model& model, const std::string& path) {
  detail::BinaryWriter w(path);
  w.bytes(kMagic.data(), kMagic.size());
  w.value<std::uint32_t>(kCheckpointVersion);
  w.value<std::uint32_t>(static_cast<std::uint32_t>(model.layers.size()));
  for (const DenseLayer& layer : model.layers) {
    w.value<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.rows()));
    w.value<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.cols()));
  }
  w.value<std::uint32_t>(static_cast<std::uint32_t>(model.head.rows()));
  w.value<std::uint32_t>(static_cast<std::uint32_t>(model.head.cols()));
  w.value<std::uint8_t>(model.mode.embed_normalized ? 1 : 0);
  w.value<std::uint8_t>(model.mode.rows_normalized ? 1 : 0);
  w.value<double>(model.leaky_slope);
  w.value<double>(model.log_beta);
  Model copy = model;
  for (std::span<double> block : copy.parameters()) w.array(block.data(), block.size());
}

Model load_checkpoint(const std::string& path) {
  detail::BinaryReader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw Error(Errc::io, path + " is not a checkpoint");
  auto version = r.value<std::uint32_t>();
  if (version != kCheckpointVersion) throw Error(Errc::io, "unsupported checkpoint version " + std::to_string(version));
  auto n_layers = r.value<std::uint32_t>();
  if (n_layers == 0 || n_layers > 1024) throw Error(Errc::io, "corrupt layer count");
  Model m;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    auto in = r.value<std::uint32_t>();
    auto out = r.value<std::uint32_t>();
    DenseLayer layer;
    layer.weight.resize(in, out);
    layer.bias.resize(out);
    m.layers.push_back(std::move(layer));
  }
  auto rows = r.value<std::uint32_t>();
  auto cols = r.value<std::uint32_t>();
  m.head.resize(rows, cols);
  m.mode.embed_normalized = r.value<std::uint8_t>() != 0;
  m.mode.rows_normalized = r.value<std::uint8_t>() != 0;
  m.leaky_slope = r.value<double>();
  m.log_beta = r.value<double>();
  auto blocks = m.parameters();
  for (std::size_t b = 0; b + 1 < blocks.size(); ++b) r.array(blocks[b].data(), blocks[b].size());
  double stored_log_beta = r.value<double>();
  if (stored_log_beta != m.log_beta) throw Error(Errc::io, "checkpoint temperature mismatch");
  if (!r.at_end()) throw Error(Errc::io, "trailing bytes in checkpoint");
  return m;
}

}  // namespace idlab
