#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "idlab/checkpoint.hpp"
#include "idlab/errors.hpp"
#include "idlab/net.hpp"

using namespace idlab;

namespace {

struct Problem {
  Model model;
  Matrix x;
  std::vector<Label> labels;
};

Problem make_problem(NormalizationMode mode, std::uint64_t seed) {
  RngStream rng(seed);
  EncoderSpec spec;
  spec.input_dim = 4;
  spec.output_dim = 3;
  spec.hidden = {7, 6};
  Problem p{init_model(spec, 9, mode, rng), gaussian_matrix(12, 4, rng), {}};
  // move away from the initial small head so every term contributes
  p.model.head = gaussian_matrix(9, 3, rng);
  p.model.log_beta = 0.3;
  for (int i = 0; i < 12; ++i) p.labels.push_back(static_cast<Label>(rng.below(9)));
  return p;
}

}  // namespace

class Gradients : public ::testing::TestWithParam<NormalizationMode> {};

TEST_P(Gradients, MatchFiniteDifferences) {
  Problem p = make_problem(GetParam(), 31);
  GradientTape tape = backward(p.model, p.x, p.labels);
  EXPECT_NEAR(tape.loss, cross_entropy(p.model, p.x, p.labels), 1e-12);

  std::vector<std::span<double>> params = p.model.parameters();
  std::vector<std::span<double>> grads = tape.blocks();
  ASSERT_EQ(params.size(), grads.size());
  const double h = 1e-6;
  for (std::size_t b = 0; b < params.size(); ++b) {
    double diff2 = 0.0, g2 = 0.0, fd2 = 0.0;
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double saved = params[b][i];
      params[b][i] = saved + h;
      const double up = cross_entropy(p.model, p.x, p.labels);
      params[b][i] = saved - h;
      const double down = cross_entropy(p.model, p.x, p.labels);
      params[b][i] = saved;
      const double fd = (up - down) / (2.0 * h);
      diff2 += (fd - grads[b][i]) * (fd - grads[b][i]);
      g2 += grads[b][i] * grads[b][i];
      fd2 += fd * fd;
    }
    const double scale = std::sqrt(std::max(g2, fd2));
    if (scale < 1e-12) continue;
    EXPECT_LE(std::sqrt(diff2) / scale, 1e-4) << "mode " << GetParam().name() << " block " << b;
  }
}

INSTANTIATE_TEST_SUITE_P(AllModes, Gradients,
                         ::testing::Values(NormalizationMode::c1(), NormalizationMode::c2(), NormalizationMode::c3(),
                                           NormalizationMode::c4()),
                         [](const auto& info) { return info.param.name(); });

TEST(Net, WorkspaceReuseGivesSameGradients) {
  Problem p = make_problem(NormalizationMode::c1(), 32);
  GradientTape fresh = backward(p.model, p.x, p.labels);
  GradientTape tape = GradientTape::zeros_like(p.model);
  BackwardWorkspace ws;
  backward_into(p.model, p.x, p.labels, tape, ws);
  backward_into(p.model, p.x, p.labels, tape, ws);
  EXPECT_EQ(tape.head, fresh.head);
  EXPECT_EQ(tape.log_beta, fresh.log_beta);
  EXPECT_EQ(tape.weight.front(), fresh.weight.front());
}

TEST(Net, NormalizedEmbeddingsHaveUnitNorm) {
  Problem p = make_problem(NormalizationMode::c2(), 33);
  Matrix e = encode(p.model, p.x);
  for (Eigen::Index r = 0; r < e.rows(); ++r) EXPECT_NEAR(e.row(r).norm(), 1.0, 1e-12);
  Problem q = make_problem(NormalizationMode::c3(), 33);
  Matrix w = q.model.effective_head();
  for (Eigen::Index r = 0; r < w.rows(); ++r) EXPECT_NEAR(w.row(r).norm(), 1.0, 1e-12);
}

TEST(Net, IdentityModelPassesInputThrough) {
  Model m = identity_model(3, 4, NormalizationMode::c4());
  RngStream rng(34);
  Matrix x = gaussian_matrix(5, 3, rng);
  EXPECT_LE((encode(m, x) - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Net, CrossEntropyOfKnownScores) {
  Matrix scores(1, 2);
  scores << 1.0, -1.0;
  std::vector<Label> y = {0};
  EXPECT_NEAR(row_cross_entropy(scores, y)[0], std::log1p(std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(std::log1p(std::exp(-2.0)), 0.12692801104297263, 1e-15);
}

TEST(Net, LabelOutOfRangeRejected) {
  Problem p = make_problem(NormalizationMode::c1(), 35);
  p.labels[0] = 9;
  EXPECT_THROW(cross_entropy(p.model, p.x, p.labels), Error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Problem p = make_problem(NormalizationMode::c3(), 36);
  const auto path = std::filesystem::temp_directory_path() / "idlab_ckpt_roundtrip.ckpt";
  save_checkpoint(p.model, path.string());
  Model back = load_checkpoint(path.string());
  EXPECT_EQ(back.mode, p.model.mode);
  EXPECT_EQ(back.log_beta, p.model.log_beta);
  EXPECT_EQ(back.head, p.model.head);
  ASSERT_EQ(back.layers.size(), p.model.layers.size());
  for (std::size_t l = 0; l < back.layers.size(); ++l) {
    EXPECT_EQ(back.layers[l].weight, p.model.layers[l].weight);
    EXPECT_EQ(back.layers[l].bias, p.model.layers[l].bias);
  }
  EXPECT_EQ(encode(back, p.x), encode(p.model, p.x));
  std::filesystem::remove(path);
}

TEST(Checkpoint, BadMagicRejected) {
  const auto path = std::filesystem::temp_directory_path() / "idlab_ckpt_bad.ckpt";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fputs("not a checkpoint", f);
    std::fclose(f);
  }
  EXPECT_THROW(load_checkpoint(path.string()), Error);
  std::filesystem::remove(path);
}
