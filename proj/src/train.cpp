#include "idlab/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

enum StreamTag : std::uint64_t {
  kInitStream = 11,
  kNoiseStream = 12,
  kShuffleStream = 13,
  kAugmentStream = 14,
};

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, Model& model) : config_(config) {
    for (std::span<double> block : model.parameters()) {
      first_.emplace_back(block.size(), 0.0);
      if (config.optimizer == OptimizerKind::adam) second_.emplace_back(block.size(), 0.0);
    }
  }

  void step(Model& model, GradientTape& tape) {
    ++t_;
    auto params = model.parameters();
    auto grads = tape.blocks();
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::adam) {
      const double b1 = config_.adam_beta1;
      const double b2 = config_.adam_beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      for (std::size_t b = 0; b < params.size(); ++b) {
        double* p = params[b].data();
        const double* g = grads[b].data();
        double* m = first_[b].data();
        double* v = second_[b].data();
        for (std::size_t i = 0; i < params[b].size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * g[i];
          v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
          p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_epsilon);
        }
      }
    } else {
      const double mu = config_.sgd_momentum;
      for (std::size_t b = 0; b < params.size(); ++b) {
        double* p = params[b].data();
        const double* g = grads[b].data();
        double* m = first_[b].data();
        for (std::size_t i = 0; i < params[b].size(); ++i) {
          m[i] = mu * m[i] + g[i];
          p[i] -= lr * m[i];
        }
      }
    }
  }

 private:
  const TrainConfig& config_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::uint64_t t_ = 0;
};

}  // namespace

std::string to_string(Task task) {
  return task == Task::instance_discrimination ? "instance_discrimination" : "supervised";
}

Task task_from_string(const std::string& name) {
  if (name == "instance_discrimination") return Task::instance_discrimination;
  if (name == "supervised") return Task::supervised;
  throw Error(Errc::invalid_config, "unknown task '" + name + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw Error(Errc::invalid_config, "unknown optimizer '" + name + "'");
}

void TrainConfig::validate(const Dataset& dataset) const {
  if (epochs < 1) throw Error(Errc::invalid_config, "epochs must be >= 1");
  if (batch_size < 1 || batch_size > dataset.size())
    throw Error(Errc::invalid_config, "batch_size must lie in [1, N]");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(Errc::invalid_config, "learning rate must be > 0");
  if (!(label_noise_ratio >= 0.0 && label_noise_ratio <= 1.0))
    throw Error(Errc::invalid_config, "label noise ratio must lie in [0, 1]");
  const LabelTarget trained_on = task == Task::supervised ? LabelTarget::class_label : LabelTarget::instance;
  if (label_noise_ratio > 0.0 && label_noise_target != trained_on)
    throw Error(Errc::invalid_config, "label noise targets " + to_string(label_noise_target) +
                                          " labels, which the " + to_string(task) + " task does not train on");
  if (hidden_layers < 0 || hidden_width < 1) throw Error(Errc::invalid_config, "encoder shape");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw Error(Errc::invalid_config, "leaky slope must lie in (0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_epsilon > 0.0))
    throw Error(Errc::invalid_config, "adam moment constants");
  if (!(sgd_momentum >= 0.0 && sgd_momentum < 1.0)) throw Error(Errc::invalid_config, "sgd momentum");
}

int label_count(const Dataset& dataset, Task task) {
  return task == Task::instance_discrimination ? dataset.class_function.num_instances() : dataset.spec.num_classes;
}

const std::vector<Label>& task_labels(const Dataset& dataset, Task task) {
  return task == Task::instance_discrimination ? dataset.instance_labels : dataset.class_labels;
}

void TrainTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << "epoch,loss,accuracy,grad_norm,seconds\n";
  out.precision(17);
  for (const EpochRecord& r : epochs)
    out << r.epoch << ',' << r.loss << ',' << r.accuracy << ',' << r.grad_norm << ',' << r.seconds << '\n';
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  config.validate(dataset);
  const RngStream root(config.seed);

  Dataset noisy = config.label_noise_ratio > 0.0
                      ? [&] {
                          RngStream noise_rng = root.split(kNoiseStream);
                          return inject_label_noise(dataset, config.label_noise_ratio, config.label_noise_target,
                                                    noise_rng);
                        }()
                      : dataset;
  const std::vector<Label>& labels = task_labels(noisy, config.task);

  EncoderSpec enc;
  enc.input_dim = dataset.spec.observation_dim();
  enc.output_dim = dataset.spec.latent_dim;
  enc.hidden.assign(static_cast<std::size_t>(config.hidden_layers), config.hidden_width);
  enc.leaky_slope = config.leaky_slope;
  RngStream init_rng = root.split(kInitStream);

  TrainResult result;
  result.model = init_model(enc, label_count(dataset, config.task), config.mode, init_rng);
  result.training_labels = labels;
  Model& model = result.model;
  Optimizer optimizer(config, model);
  GradientTape tape = GradientTape::zeros_like(model);
  BackwardWorkspace workspace;

  const int n = dataset.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::vector<Label> batch_labels;
  std::vector<Label> batch_classes;
  const RngStream shuffle_root = root.split(kShuffleStream);
  const RngStream augment_root = root.split(kAugmentStream);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng = shuffle_root.split(static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order.begin(), order.end());
    const RngStream epoch_augment = augment_root.split(static_cast<std::uint64_t>(epoch));

    double loss_sum = 0.0;
    double grad_norm_sum = 0.0;
    int correct = 0;
    int steps = 0;
    for (int begin = 0, b = 0; begin < n; begin += config.batch_size, ++b) {
      const int end = std::min(n, begin + config.batch_size);
      const int size = end - begin;
      batch_labels.resize(static_cast<std::size_t>(size));
      batch_classes.resize(static_cast<std::size_t>(size));
      for (int k = 0; k < size; ++k) {
        auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(begin + k)]);
        batch_labels[static_cast<std::size_t>(k)] = labels[idx];
        batch_classes[static_cast<std::size_t>(k)] = dataset.clean_class_labels[idx];
      }
      Matrix x;
      if (config.resample_latents) {
        Matrix z = sample_latents(dataset.clusters, dataset.spec.conditional, batch_classes,
                                  epoch_augment.split(static_cast<std::uint64_t>(b)));
        x = dataset.generator.apply(z);
      } else {
        x.resize(size, dataset.x.cols());
        for (int k = 0; k < size; ++k) x.row(k) = dataset.x.row(order[static_cast<std::size_t>(begin + k)]);
      }
      backward_into(model, x, batch_labels, tape, workspace);
      if (!std::isfinite(tape.loss))
        throw DivergenceError(epoch, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                         std::to_string(b));
      loss_sum += tape.loss * size;
      correct += tape.correct;
      grad_norm_sum += tape.norm();
      ++steps;
      optimizer.step(model, tape);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / n;
    rec.accuracy = static_cast<double>(correct) / n;
    rec.grad_norm = grad_norm_sum / steps;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(rec.loss) || !std::isfinite(model.log_beta))
      throw DivergenceError(epoch, "non-finite state after epoch " + std::to_string(epoch));
    result.trace.epochs.push_back(rec);
  }
  return result;
}

double bayes_optimal_loss(const Dataset& dataset, Task task, const Matrix& z, std::span<const Label> labels) {
  if (dataset.spec.conditional.family != ConditionalFamily::vmf)
    throw Error(Errc::unsupported_oracle, "closed-form posterior needs a vMF conditional");
  const double kappa = dataset.spec.conditional.kappa;
  Matrix scores = kappa * (z * dataset.clusters.matrix().transpose());
  std::vector<Label> classes(labels.begin(), labels.end());
  if (task == Task::instance_discrimination)
    for (auto& c : classes) c = dataset.class_function(c);
  std::vector<double> per_row = row_cross_entropy(scores, classes);
  double sum = 0.0;
  if (task == Task::instance_discrimination) {
    auto members = dataset.class_function.members();
    for (std::size_t r = 0; r < per_row.size(); ++r)
      sum += per_row[r] + std::log(static_cast<double>(members[static_cast<std::size_t>(classes[r])].size()));
  } else {
    for (double v : per_row) sum += v;
  }
  return sum / static_cast<double>(per_row.size());
}

double bayes_optimal_loss(const Dataset& dataset, Task task) {
  return bayes_optimal_loss(dataset, task, dataset.z, task_labels(dataset, task));
}

}  // namespace idlab
