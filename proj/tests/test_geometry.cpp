#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "idlab/bessel.hpp"
#include "idlab/errors.hpp"
#include "idlab/sphere.hpp"

using namespace idlab;

namespace {

UnitVector e1(int d) {
  Vector v = Vector::Zero(d);
  v(0) = 1.0;
  return UnitVector::from(v);
}

// Mean resultant length of vMF on S^2: coth(k) - 1/k.
double a3(double kappa) { return 1.0 / std::tanh(kappa) - 1.0 / kappa; }

}  // namespace

TEST(Bessel, MatchesStdCylBesselI) {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 4.0, 9.0}) {
    for (double x : {1e-3, 0.5, 3.0, 10.0, 40.0, 120.0, 600.0}) {
      const double ref = std::log(std::cyl_bessel_i(nu, x));
      EXPECT_NEAR(log_bessel_i(nu, x), ref, 1e-10 * std::max(1.0, std::abs(ref))) << "nu=" << nu << " x=" << x;
    }
  }
}

TEST(Bessel, HalfIntegerClosedForm) {
  // I_{1/2}(x) = sqrt(2 / (pi x)) sinh x
  for (double x : {0.1, 2.0, 30.0}) {
    const double ref = 0.5 * std::log(2.0 / (std::numbers::pi * x)) + std::log(std::sinh(x));
    EXPECT_NEAR(log_bessel_i(0.5, x), ref, 1e-11 * std::max(1.0, std::abs(ref)));
  }
  EXPECT_NEAR(bessel_i_ratio(0.5, 7.0), a3(7.0), 1e-12);
}

TEST(Bessel, LargeArgumentStaysFinite) {
  EXPECT_TRUE(std::isfinite(log_bessel_i(2.5, 1e5)));
  EXPECT_NEAR(bessel_i_ratio(1.5, 1e4), 1.0, 1e-3);
}

TEST(UnitVector, RejectsOffSphere) {
  Vector v = Vector::Ones(3);
  EXPECT_THROW(UnitVector::from(v), Error);
  EXPECT_NEAR(UnitVector::normalized(v).coords().norm(), 1.0, 1e-15);
}

TEST(Sphere, UniformHasZeroMeanAndUnitNorm) {
  RngStream rng(11);
  const int n = 20000;
  Vector mean = Vector::Zero(4);
  for (int i = 0; i < n; ++i) {
    UnitVector u = sample_uniform_sphere(4, rng);
    ASSERT_NEAR(u.coords().norm(), 1.0, 1e-12);
    mean += u.coords();
  }
  mean /= n;
  // each coordinate has variance 1/d
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 4.0 * std::sqrt(0.25 / n));
}

class VmfMeanCosine : public ::testing::TestWithParam<double> {};

TEST_P(VmfMeanCosine, MatchesA3WithinThreeStandardErrors) {
  const double kappa = GetParam();
  const UnitVector mu = e1(3);
  RngStream rng(static_cast<std::uint64_t>(kappa * 1000));
  const int n = 40000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = sample_vmf(mu, kappa, rng).dot(mu);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, a3(kappa), 3.0 * se) << "kappa=" << kappa;
}

INSTANTIATE_TEST_SUITE_P(Kappas, VmfMeanCosine, ::testing::Values(1.0, 10.0, 50.0));

TEST(Sphere, VmfDensityNormalizesOnCircle) {
  for (double kappa : {0.0, 1.0, 10.0, 50.0}) {
    const UnitVector mu = UnitVector::normalized(Vector::Ones(2));
    const int m = 20000;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * std::numbers::pi * i / m;
      Vector z(2);
      z << std::cos(t), std::sin(t);
      total += std::exp(vmf_log_density(UnitVector::from(z), mu, kappa));
    }
    // periodic trapezoid rule
    EXPECT_NEAR(total * 2.0 * std::numbers::pi / m, 1.0, 1e-6) << "kappa=" << kappa;
  }
}

TEST(Sphere, VmfLogNormalizerAtD3) {
  // C_3(k) = k / (4 pi sinh k)
  for (double kappa : {0.5, 5.0, 40.0})
    EXPECT_NEAR(vmf_log_normalizer(3, kappa), std::log(kappa / (4.0 * std::numbers::pi * std::sinh(kappa))), 1e-10);
  EXPECT_NEAR(vmf_log_normalizer(3, 0.0), -std::log(4.0 * std::numbers::pi), 1e-12);
}

TEST(Sphere, TruncatedLaplaceRespectsBox) {
  const UnitVector mu = UnitVector::normalized(Vector::LinSpaced(5, 1.0, 2.0));
  RngStream rng(3);
  SamplerStats stats;
  for (int i = 0; i < 2000; ++i) {
    UnitVector z = sample_spherical_conditional(mu, SphericalConditional::trunc_laplace(2.0, 0.5), rng,
                                                kDefaultMaxTries, stats);
    EXPECT_LE((z.coords() - mu.coords()).cwiseAbs().maxCoeff(), 0.5);
  }
  EXPECT_GT(stats.acceptance_rate(), 0.0);
  EXPECT_LE(stats.acceptance_rate(), 1.0);
}

TEST(Sphere, GenNormalShapeTwoMatchesVmf) {
  // exp(-a ||mu - z||^2) = exp(-2a) exp(2a <mu, z>) on the sphere
  const UnitVector mu = e1(3);
  RngStream rng(5);
  const int n = 40000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += sample_spherical_conditional(mu, SphericalConditional::gen_normal(2.5, 2.0), rng).dot(mu);
  EXPECT_NEAR(sum / n, a3(5.0), 0.01);
}

TEST(Sphere, ConditionalWeights) {
  Vector mu = Vector::Zero(2), z = Vector::Zero(2);
  mu(0) = 1.0;
  z(1) = 1.0;
  EXPECT_NEAR(conditional_log_weight(z, mu, SphericalConditional::gen_normal(1.5, 1.0)), -3.0, 1e-14);
  EXPECT_NEAR(conditional_log_weight(z, mu, SphericalConditional::gen_normal(1.0, 2.0)), -2.0, 1e-14);
  EXPECT_EQ(conditional_log_weight(z, mu, SphericalConditional::trunc_laplace(1.0, 0.5)),
            -std::numeric_limits<double>::infinity());
}

TEST(Sphere, InvalidParametersRejected) {
  EXPECT_THROW(SphericalConditional::vmf(-1.0).validate(), Error);
  EXPECT_THROW(SphericalConditional::gen_normal(1.0, 5.0).validate(), Error);
  EXPECT_THROW(SphericalConditional::trunc_laplace(1.0, 0.0).validate(), Error);
}

TEST(Sphere, SamplingIsDeterministic) {
  const UnitVector mu = e1(5);
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_vmf(mu, 10.0, a).coords(), sample_vmf(mu, 10.0, b).coords());
}
