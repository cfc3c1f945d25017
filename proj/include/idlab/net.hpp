#pragma once

#include <span>
#include <string>
#include <vector>

#include "idlab/dgp.hpp"
#include "idlab/linalg.hpp"
#include "idlab/rng.hpp"

namespace idlab {

/// Which of the embedding / head-row unit-norm projections are active.
/// C1 = both, C2 = embeddings only, C3 = rows only, C4 = neither.
struct NormalizationMode {
  bool embed_normalized = false;
  bool rows_normalized = false;

  static constexpr NormalizationMode c1() { return {true, true}; }
  static constexpr NormalizationMode c2() { return {true, false}; }
  static constexpr NormalizationMode c3() { return {false, true}; }
  static constexpr NormalizationMode c4() { return {false, false}; }

  std::string name() const;
  static NormalizationMode from_name(const std::string& name);

  bool operator==(const NormalizationMode&) const = default;
};

struct EncoderSpec {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> hidden = {256, 256, 256};
  double leaky_slope = 0.2;
};

/// y = x W + b for row batches; W is in x out.
struct DenseLayer {
  Matrix weight;
  RowVector bias;
};

/// Encoder f (affine maps with leaky rectifiers between them), bias-free head
/// with one row per label, and the temperature beta = exp(log_beta).
struct Model {
  std::vector<DenseLayer> layers;
  Matrix head;  // K x d
  double log_beta = 0.0;
  NormalizationMode mode;
  double leaky_slope = 0.2;

  int input_dim() const { return static_cast<int>(layers.front().weight.rows()); }
  int embed_dim() const { return static_cast<int>(layers.back().weight.cols()); }
  int head_rows() const { return static_cast<int>(head.rows()); }
  double beta() const;

  /// Head rows as used in the logits (unit-normalized when the mode says so).
  Matrix effective_head() const;

  /// Parameter blocks in declaration order: per layer weight, bias; head; log_beta.
  std::vector<std::span<double>> parameters();
  std::size_t parameter_count() const;
};

/// Fan-in scaled uniform encoder weights, zero biases, head rows uniform on
/// the sphere scaled by 0.1, beta = 1.
Model init_model(const EncoderSpec& spec, int head_rows, NormalizationMode mode, RngStream& rng);

/// Single identity layer (D = d), so encode(x) = x up to normalization.
Model identity_model(int dim, int head_rows, NormalizationMode mode);

Matrix encode(const Model& model, const Matrix& x);
Matrix logits(const Model& model, const Matrix& z_tilde);

/// Mean over the batch of -log softmax(logits)[label], log-sum-exp stabilized.
double cross_entropy(const Model& model, const Matrix& x, std::span<const Label> labels);

/// Per-row -log softmax(scores)[label] for an arbitrary score matrix.
std::vector<double> row_cross_entropy(const Matrix& scores, std::span<const Label> labels);

/// Gradient accumulators with the same block layout as Model::parameters().
struct GradientTape {
  std::vector<Matrix> weight;
  std::vector<RowVector> bias;
  Matrix head;
  double log_beta = 0.0;
  double loss = 0.0;
  int correct = 0;

  static GradientTape zeros_like(const Model& model);
  void zero();
  std::vector<std::span<double>> blocks();
  double norm() const;
};

/// Activations and gradient buffers reused across training steps.
struct BackwardWorkspace {
  std::vector<Matrix> inputs;         // input to each layer
  std::vector<Matrix> preactivation;  // hidden layer outputs before the rectifier
  Matrix raw;                         // final affine output
  RowVector raw_norm;
  Matrix embedding;
  Matrix rows;
  RowVector row_norms;
  Matrix scores;
  Matrix dscores;
  Matrix drows;
  Matrix demb;
  Matrix dh;
  Matrix dh_next;
};

/// Exact reverse-mode gradient of cross_entropy, including the Jacobians of
/// the unit-norm projections.
GradientTape backward(const Model& model, const Matrix& x, std::span<const Label> labels);

/// As backward(), writing into an existing tape shaped like the model.
void backward_into(const Model& model, const Matrix& x, std::span<const Label> labels, GradientTape& tape,
                   BackwardWorkspace& ws);

}  // namespace idlab
