#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>

#include "idlab/linalg.hpp"
#include "idlab/rng.hpp"

using namespace idlab;

TEST(Rng, SameSeedSameSequence) {
  RngStream a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, SplitIgnoresParentConsumption) {
  RngStream a(99), b(99);
  for (int i = 0; i < 17; ++i) b.next_u64();
  RngStream ca = a.split(5), cb = b.split(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(ca.next_u64(), cb.next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
  RngStream rng(1);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, BelowIsUniformChiSquare) {
  RngStream rng(2);
  const int k = 10, n = 100000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) ++counts[rng.below(k)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / double(k)) * (c - n / double(k)) / (n / double(k));
  // 99.9% quantile of chi-square with 9 dof
  EXPECT_LT(chi2, 27.88);
}

TEST(Rng, GammaMean) {
  RngStream rng(3);
  for (double shape : {0.5, 2.0, 7.5}) {
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rng.gamma(shape);
    EXPECT_NEAR(s / n, shape, 4.0 * std::sqrt(shape / n));
  }
}

TEST(Hash, StableAndOrderSensitive) {
  EXPECT_EQ(hash_words({1, 2, 3}), hash_words({1, 2, 3}));
  EXPECT_NE(hash_words({1, 2, 3}), hash_words({3, 2, 1}));
  EXPECT_EQ(hash_string("abc"), hash_string("abc"));
  EXPECT_NE(hash_string("abc"), hash_string("abd"));
}

TEST(JacobiSvd, ReconstructsAndMatchesBidiagonalization) {
  RngStream rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a = gaussian_matrix(20, 20, rng);
    Svd svd = jacobi_svd(a);
    Matrix rebuilt = svd.u * svd.s.asDiagonal() * svd.v.transpose();
    EXPECT_LE((rebuilt - a).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXd dense = a;
    Eigen::BDCSVD<Eigen::MatrixXd> oracle(dense);
    EXPECT_LE((svd.s - oracle.singularValues()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_TRUE(std::is_sorted(svd.s.data(), svd.s.data() + svd.s.size(), std::greater<>()));
  }
}

TEST(JacobiSvd, TallMatrix) {
  RngStream rng(21);
  Matrix a = gaussian_matrix(50, 6, rng);
  Svd svd = jacobi_svd(a);
  EXPECT_LE((svd.u * svd.s.asDiagonal() * svd.v.transpose() - a).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((svd.u.transpose() * svd.u - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linalg, RandomOrthogonalIsOrthogonal) {
  RngStream rng(22);
  for (int n : {2, 5, 20}) {
    Matrix q = random_orthogonal(n, rng);
    EXPECT_LE((q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(condition_number(q), 1.0, 1e-10);
  }
}

TEST(Linalg, NumericalRank) {
  RngStream rng(23);
  Matrix b = gaussian_matrix(10, 3, rng);
  Matrix a = b * gaussian_matrix(3, 8, rng);
  EXPECT_EQ(numerical_rank(a), 3);
}

TEST(Linalg, OrderFreeSumIgnoresOrder) {
  RngStream rng(24);
  std::vector<double> v(1000);
  for (auto& x : v) x = rng.normal() * std::pow(10.0, rng.below(16));
  const double s = order_free_sum(v);
  rng.shuffle(v.begin(), v.end());
  EXPECT_EQ(order_free_sum(v), s);
}
