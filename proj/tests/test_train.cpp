#include <gtest/gtest.h>

#include "idlab/errors.hpp"
#include "idlab/train.hpp"

using namespace idlab;

namespace {

Dataset small_dataset(std::uint64_t seed = 1) {
  DgpSpec s;
  s.latent_dim = 3;
  s.num_samples = 2000;
  s.num_classes = 10;
  s.seed = seed;
  return generate_dataset(s);
}

TrainConfig small_config(Task task) {
  TrainConfig c;
  c.task = task;
  c.mode = task == Task::supervised ? NormalizationMode::c2() : NormalizationMode::c1();
  c.epochs = 30;
  c.batch_size = 128;
  c.learning_rate = 3e-3;
  c.hidden_width = 32;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Train, SupervisedLossNotBelowBayes) {
  Dataset data = small_dataset();
  TrainResult r = train(data, small_config(Task::supervised));
  const double bayes = bayes_optimal_loss(data, Task::supervised);
  const double loss = cross_entropy(r.model, data.x, data.class_labels);
  EXPECT_GE(loss, bayes - 0.02);
  EXPECT_LT(r.trace.final_loss(), r.trace.initial_loss());
}

TEST(Train, InstanceBayesLossSplitsClassMass) {
  Dataset data = small_dataset();
  const double sup = bayes_optimal_loss(data, Task::supervised);
  const double inst = bayes_optimal_loss(data, Task::instance_discrimination);
  // instance posterior = class posterior / class size, so the gap is mean log class size
  double gap = 0.0;
  const auto members = data.class_function.members();
  for (int n = 0; n < data.size(); ++n) gap += std::log(double(members[data.class_labels[n]].size()));
  EXPECT_NEAR(inst - sup, gap / data.size(), 1e-9);
}

TEST(Train, IsDeterministic) {
  Dataset data = small_dataset();
  TrainConfig c = small_config(Task::instance_discrimination);
  c.epochs = 5;
  TrainResult a = train(data, c);
  TrainResult b = train(data, c);
  EXPECT_EQ(a.model.head, b.model.head);
  EXPECT_EQ(a.model.layers.front().weight, b.model.layers.front().weight);
  EXPECT_EQ(a.trace.final_loss(), b.trace.final_loss());
  c.seed = 5;
  EXPECT_NE(train(data, c).model.head, a.model.head);
}

TEST(Train, InstanceDiscriminationLearns) {
  Dataset data = small_dataset();
  TrainConfig c = small_config(Task::instance_discrimination);
  c.optimizer = OptimizerKind::sgd;
  c.learning_rate = 0.05;
  c.epochs = 10;
  TrainResult r = train(data, c);
  ASSERT_EQ(r.trace.epochs.size(), 10u);
  EXPECT_LT(r.trace.final_loss(), r.trace.initial_loss());
  EXPECT_EQ(r.model.head_rows(), data.class_function.num_instances());
}

TEST(Train, LabelNoiseChangesTrainingLabels) {
  Dataset data = small_dataset();
  TrainConfig c = small_config(Task::supervised);
  c.epochs = 1;
  c.label_noise_ratio = 0.5;
  c.label_noise_target = LabelTarget::class_label;
  TrainResult r = train(data, c);
  int changed = 0;
  for (int n = 0; n < data.size(); ++n) changed += r.training_labels[n] != data.class_labels[n];
  EXPECT_NEAR(changed / double(data.size()), 0.5 * 0.9, 0.05);
}

TEST(Train, InvalidConfigRejected) {
  Dataset data = small_dataset();
  TrainConfig c = small_config(Task::supervised);
  c.batch_size = 0;
  EXPECT_THROW(train(data, c), Error);
  c = small_config(Task::supervised);
  c.learning_rate = -1.0;
  EXPECT_THROW(train(data, c), Error);
  c = small_config(Task::supervised);
  c.label_noise_target = LabelTarget::instance;
  c.label_noise_ratio = 0.2;
  EXPECT_THROW(train(data, c), Error);
}
