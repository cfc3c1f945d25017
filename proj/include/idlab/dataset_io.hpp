#pragma once

#include <string>

#include "idlab/dgp.hpp"

namespace idlab {

/// Versioned little-endian container holding everything needed to retrain
/// and re-evaluate on a dataset: the spec, cluster vectors, class function,
/// generator weights, labels (noisy and clean), latents and observations.
inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace idlab
