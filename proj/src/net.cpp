#include "idlab/net.hpp"

#include <cmath>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

void forward_into(const Model& model, const Matrix& x, BackwardWorkspace& ws) {
  if (x.cols() != model.input_dim())
    throw Error(Errc::width_mismatch, "input width " + std::to_string(x.cols()) + " != encoder input " +
                                          std::to_string(model.input_dim()));
  const std::size_t n_layers = model.layers.size();
  ws.inputs.resize(n_layers);
  ws.preactivation.resize(n_layers - 1);
  ws.inputs[0] = x;
  const double slope = model.leaky_slope;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = model.layers[l];
    Matrix& pre = l + 1 < n_layers ? ws.preactivation[l] : ws.raw;
    pre.noalias() = ws.inputs[l] * layer.weight;
    pre.rowwise() += layer.bias;
    if (l + 1 < n_layers) ws.inputs[l + 1] = pre.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  }
  ws.embedding = ws.raw;
  if (model.mode.embed_normalized) {
    ws.raw_norm = ws.raw.rowwise().norm().transpose();
    for (Eigen::Index r = 0; r < ws.raw.rows(); ++r) ws.embedding.row(r) /= ws.raw_norm(r);
  }
}

void check_labels(std::span<const Label> labels, Eigen::Index rows, int head_rows) {
  if (static_cast<Eigen::Index>(labels.size()) != rows)
    throw Error(Errc::invalid_input, "label count does not match batch size");
  for (Label l : labels)
    if (l < 0 || l >= head_rows)
      throw Error(Errc::label_out_of_range, "label " + std::to_string(l) + " outside [0, " +
                                                std::to_string(head_rows) + ")");
}

}  // namespace

std::string NormalizationMode::name() const {
  if (embed_normalized && rows_normalized) return "C1";
  if (embed_normalized) return "C2";
  if (rows_normalized) return "C3";
  return "C4";
}

NormalizationMode NormalizationMode::from_name(const std::string& name) {
  if (name == "C1") return c1();
  if (name == "C2") return c2();
  if (name == "C3") return c3();
  if (name == "C4") return c4();
  throw Error(Errc::invalid_config, "unknown normalization mode '" + name + "'");
}

double Model::beta() const { return std::exp(log_beta); }

Matrix Model::effective_head() const {
  if (!mode.rows_normalized) return head;
  Matrix out = head;
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) /= out.row(r).norm();
  return out;
}

std::vector<std::span<double>> Model::parameters() {
  std::vector<std::span<double>> out;
  for (DenseLayer& layer : layers) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  out.emplace_back(head.data(), static_cast<std::size_t>(head.size()));
  out.emplace_back(&log_beta, 1);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = static_cast<std::size_t>(head.size()) + 1;
  for (const DenseLayer& layer : layers) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

Model init_model(const EncoderSpec& spec, int head_rows, NormalizationMode mode, RngStream& rng) {
  if (spec.input_dim < 1 || spec.output_dim < 2) throw Error(Errc::invalid_config, "encoder dimensions");
  if (head_rows < 1) throw Error(Errc::invalid_config, "head needs at least one row");
  Model m;
  m.mode = mode;
  m.leaky_slope = spec.leaky_slope;
  std::vector<int> widths;
  widths.push_back(spec.input_dim);
  for (int w : spec.hidden) {
    if (w < 1) throw Error(Errc::invalid_config, "hidden width must be >= 1");
    widths.push_back(w);
  }
  widths.push_back(spec.output_dim);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer;
    layer.weight.resize(in, out);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      layer.weight.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
    layer.bias = RowVector::Zero(out);
    m.layers.push_back(std::move(layer));
  }
  m.head.resize(head_rows, spec.output_dim);
  for (int r = 0; r < head_rows; ++r)
    m.head.row(r) = 0.1 * sample_uniform_sphere(spec.output_dim, rng).coords().transpose();
  m.log_beta = 0.0;
  return m;
}

Model identity_model(int dim, int head_rows, NormalizationMode mode) {
  Model m;
  m.mode = mode;
  DenseLayer layer;
  layer.weight = Matrix::Identity(dim, dim);
  layer.bias = RowVector::Zero(dim);
  m.layers.push_back(std::move(layer));
  m.head = Matrix::Zero(head_rows, dim);
  for (int r = 0; r < head_rows; ++r) m.head(r, r % dim) = 1.0;
  return m;
}

Matrix encode(const Model& model, const Matrix& x) {
  BackwardWorkspace ws;
  forward_into(model, x, ws);
  return std::move(ws.embedding);
}

Matrix logits(const Model& model, const Matrix& z_tilde) {
  if (z_tilde.cols() != model.head.cols()) throw Error(Errc::width_mismatch, "embedding width");
  return model.beta() * (z_tilde * model.effective_head().transpose());
}

std::vector<double> row_cross_entropy(const Matrix& scores, std::span<const Label> labels) {
  check_labels(labels, scores.rows(), static_cast<int>(scores.cols()));
  std::vector<double> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    double m = scores.row(r).maxCoeff();
    double lse = m + std::log((scores.row(r).array() - m).exp().sum());
    out[static_cast<std::size_t>(r)] = lse - scores(r, labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

double cross_entropy(const Model& model, const Matrix& x, std::span<const Label> labels) {
  check_labels(labels, x.rows(), model.head_rows());
  std::vector<double> per_row = row_cross_entropy(logits(model, encode(model, x)), labels);
  double sum = 0.0;
  for (double v : per_row) sum += v;
  return sum / static_cast<double>(per_row.size());
}

GradientTape GradientTape::zeros_like(const Model& model) {
  GradientTape t;
  for (const DenseLayer& layer : model.layers) {
    t.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    t.bias.push_back(RowVector::Zero(layer.bias.size()));
  }
  t.head = Matrix::Zero(model.head.rows(), model.head.cols());
  return t;
}

void GradientTape::zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
  head.setZero();
  log_beta = 0.0;
  loss = 0.0;
  correct = 0;
}

std::vector<std::span<double>> GradientTape::blocks() {
  std::vector<std::span<double>> out;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    out.emplace_back(weight[l].data(), static_cast<std::size_t>(weight[l].size()));
    out.emplace_back(bias[l].data(), static_cast<std::size_t>(bias[l].size()));
  }
  out.emplace_back(head.data(), static_cast<std::size_t>(head.size()));
  out.emplace_back(&log_beta, 1);
  return out;
}

double GradientTape::norm() const {
  double sq = head.squaredNorm() + log_beta * log_beta;
  for (const auto& w : weight) sq += w.squaredNorm();
  for (const auto& b : bias) sq += b.squaredNorm();
  return std::sqrt(sq);
}

void backward_into(const Model& model, const Matrix& x, std::span<const Label> labels, GradientTape& tape,
                   BackwardWorkspace& ws) {
  check_labels(labels, x.rows(), model.head_rows());
  const auto batch = static_cast<double>(x.rows());
  forward_into(model, x, ws);
  const Matrix& emb = ws.embedding;

  ws.rows = model.head;
  if (model.mode.rows_normalized) {
    ws.row_norms = model.head.rowwise().norm().transpose();
    for (Eigen::Index r = 0; r < ws.rows.rows(); ++r) ws.rows.row(r) /= ws.row_norms(r);
  }
  const double beta = model.beta();
  ws.scores.noalias() = emb * ws.rows.transpose();  // similarities, logits = beta * scores

  tape.zero();
  // d loss / d scores = beta (softmax - onehot) / B, built in place row by row.
  Matrix& dscores = ws.dscores;
  dscores = beta * ws.scores;
  const double row_scale = beta / batch;
  double loss = 0.0;
  double dlog_beta = 0.0;
  for (Eigen::Index r = 0; r < dscores.rows(); ++r) {
    const Label y = labels[static_cast<std::size_t>(r)];
    auto row = dscores.row(r);
    Eigen::Index argmax = 0;
    const double m = row.maxCoeff(&argmax);
    if (argmax == y) ++tape.correct;
    const double label_logit = row(y);
    row = (row.array() - m).exp();
    const double z = row.sum();
    loss += m + std::log(z) - label_logit;
    // logits = exp(log_beta) * scores, so d/dlog_beta = sum (p - onehot) .* logits / B.
    dlog_beta += (row.dot(ws.scores.row(r)) / z - ws.scores(r, y)) * beta;
    row *= row_scale / z;
    row(y) -= row_scale;
  }
  tape.loss = loss / batch;
  tape.log_beta = dlog_beta / batch;
  ws.drows.noalias() = dscores.transpose() * emb;  // K x d
  ws.demb.noalias() = dscores * ws.rows;            // B x d

  if (model.mode.rows_normalized) {
    for (Eigen::Index r = 0; r < ws.drows.rows(); ++r) {
      double proj = ws.rows.row(r).dot(ws.drows.row(r));
      tape.head.row(r) = (ws.drows.row(r) - proj * ws.rows.row(r)) / ws.row_norms(r);
    }
  } else {
    tape.head = ws.drows;
  }

  Matrix& dh = ws.dh;
  if (model.mode.embed_normalized) {
    dh.resize(ws.demb.rows(), ws.demb.cols());
    for (Eigen::Index r = 0; r < ws.demb.rows(); ++r) {
      double proj = emb.row(r).dot(ws.demb.row(r));
      dh.row(r) = (ws.demb.row(r) - proj * emb.row(r)) / ws.raw_norm(r);
    }
  } else {
    dh = ws.demb;
  }

  const double slope = model.leaky_slope;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    if (l + 1 < model.layers.size())
      dh.array() *= ws.preactivation[l].array().unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    tape.weight[l].noalias() = ws.inputs[l].transpose() * dh;
    tape.bias[l] = dh.colwise().sum();
    if (l > 0) {
      ws.dh_next.noalias() = dh * model.layers[l].weight.transpose();
      dh.swap(ws.dh_next);
    }
  }
}

GradientTape backward(const Model& model, const Matrix& x, std::span<const Label> labels) {
  GradientTape tape = GradientTape::zeros_like(model);
  BackwardWorkspace ws;
  backward_into(model, x, labels, tape, ws);
  return tape;
}

}  // namespace idlab
