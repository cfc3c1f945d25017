#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idlab/dgp.hpp"
#include "idlab/net.hpp"

namespace idlab {

enum class Task { instance_discrimination, supervised };
enum class OptimizerKind { adam, sgd };

std::string to_string(Task task);
Task task_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  Task task = Task::instance_discrimination;
  NormalizationMode mode = NormalizationMode::c1();
  int epochs = 300;
  int batch_size = 256;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double sgd_momentum = 0.9;
  double label_noise_ratio = 0.0;
  LabelTarget label_noise_target = LabelTarget::instance;
  /// Draw a fresh latent from the sample's class conditional every time the
  /// sample is visited (the augmentation model of the DGP). When false the
  /// fixed dataset rows are reused.
  bool resample_latents = true;
  int hidden_layers = 3;
  int hidden_width = 256;
  double leaky_slope = 0.2;
  std::uint64_t seed = 0;

  /// Throws invalid-config for out-of-range fields or a mismatch with the dataset.
  void validate(const Dataset& dataset) const;

  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double grad_norm = 0.0;  // mean over the epoch's steps
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;

  double initial_loss() const { return epochs.front().loss; }
  double final_loss() const { return epochs.back().loss; }
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  Model model;
  TrainTrace trace;
  /// Labels the model was trained on (noisy when label noise is configured).
  std::vector<Label> training_labels;
};

/// Label space cardinality of the task for this dataset.
int label_count(const Dataset& dataset, Task task);
/// Labels used as targets for the task (instance or class labels).
const std::vector<Label>& task_labels(const Dataset& dataset, Task task);

TrainResult train(const Dataset& dataset, const TrainConfig& config);

/// Mean cross-entropy attained by the analytic vMF posterior on the dataset's
/// latents. For instance labels the class posterior is split uniformly over
/// the class's instances. Throws unsupported-oracle for non-vMF conditionals.
double bayes_optimal_loss(const Dataset& dataset, Task task);

/// Same oracle evaluated on explicit latents and task labels.
double bayes_optimal_loss(const Dataset& dataset, Task task, const Matrix& z, std::span<const Label> labels);

}  // namespace idlab
