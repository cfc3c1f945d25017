#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "idlab/linalg.hpp"
#include "idlab/rng.hpp"

namespace idlab {

/// A point on S^{d-1}, d >= 2. Construction validates the norm.
class UnitVector {
 public:
  static constexpr double kNormTolerance = 1e-9;

  /// Accepts v only if | ||v|| - 1 | <= 1e-9.
  static UnitVector from(Vector v);
  /// Projects a nonzero v onto the sphere.
  static UnitVector normalized(const Vector& v);

  const Vector& coords() const noexcept { return v_; }
  int dim() const noexcept { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_(i); }
  double dot(const UnitVector& other) const { return v_.dot(other.v_); }

 private:
  explicit UnitVector(Vector v) : v_(std::move(v)) {}
  Vector v_;
};

enum class ConditionalFamily { vmf, gen_normal, trunc_laplace };

std::string to_string(ConditionalFamily family);
ConditionalFamily conditional_family_from_string(const std::string& name);

/// Conditional law of a latent around its cluster vector mu.
///   vmf:           p(z) ~ exp(kappa <mu, z>)
///   gen_normal:    p(z) ~ exp(-alpha ||mu - z||_shape^shape)
///   trunc_laplace: gen_normal with shape 1, restricted to max_k |mu_k - z_k| <= truncation
struct SphericalConditional {
  ConditionalFamily family = ConditionalFamily::vmf;
  double kappa = 0.0;
  double alpha = 0.0;
  double shape = 2.0;
  std::optional<double> truncation;

  static SphericalConditional vmf(double kappa);
  static SphericalConditional gen_normal(double alpha, double shape);
  static SphericalConditional trunc_laplace(double alpha, double truncation);

  /// Throws invalid-parameter when the active family's parameters are out of range.
  void validate() const;

  bool operator==(const SphericalConditional&) const = default;
};

/// Proposal bookkeeping for the rejection samplers.
struct SamplerStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

inline constexpr std::uint64_t kDefaultMaxTries = 1'000'000;

UnitVector sample_uniform_sphere(int d, RngStream& rng);

/// Exact vMF draw (Wood 1994): rejection for the cosine w = <mu, z>, uniform
/// tangent direction, Householder reflection e_1 -> mu.
UnitVector sample_vmf(const UnitVector& mu, double kappa, RngStream& rng);

/// log C_d(kappa) with the vMF density C_d(kappa) exp(kappa <mu, z>) on S^{d-1}.
double vmf_log_normalizer(int d, double kappa);

double vmf_log_density(const UnitVector& z, const UnitVector& mu, double kappa);

UnitVector sample_spherical_conditional(const UnitVector& mu, const SphericalConditional& cond,
                                        RngStream& rng,
                                        std::uint64_t max_tries = kDefaultMaxTries);
UnitVector sample_spherical_conditional(const UnitVector& mu, const SphericalConditional& cond,
                                        RngStream& rng, std::uint64_t max_tries,
                                        SamplerStats& stats);

/// Unnormalized log density of the conditional (exact for vMF including the
/// normalizer; gen-normal families return the log acceptance weight, -inf
/// outside the truncation box).
double conditional_log_weight(const Vector& z, const Vector& mu, const SphericalConditional& cond);

}  // namespace idlab
