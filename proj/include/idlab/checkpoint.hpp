#pragma once

#include <string>

#include "idlab/net.hpp"

namespace idlab {

/// Versioned little-endian container:
///   magic "IDLCKPT\0", u32 version, u32 layer count,
///   per layer u32 in, u32 out, u32 head rows, u32 head cols,
///   u8 embed_normalized, u8 rows_normalized, f64 leaky slope, f64 log_beta,
///   then f64 parameters in Model::parameters() order (row-major).
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace idlab
