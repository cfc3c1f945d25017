#include "idlab/sphere.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "idlab/bessel.hpp"
#include "idlab/errors.hpp"

namespace idlab {

UnitVector UnitVector::from(Vector v) {
  if (v.size() < 2) throw Error(Errc::invalid_dimension, "unit vectors need d >= 2");
  double n = v.norm();
  if (!(std::abs(n - 1.0) <= kNormTolerance))
    throw Error(Errc::invalid_input, "vector norm " + std::to_string(n) + " is not 1");
  return UnitVector(std::move(v));
}

UnitVector UnitVector::normalized(const Vector& v) {
  if (v.size() < 2) throw Error(Errc::invalid_dimension, "unit vectors need d >= 2");
  double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(Errc::invalid_input, "cannot normalize zero vector");
  return UnitVector(v / n);
}

std::string to_string(ConditionalFamily family) {
  switch (family) {
    case ConditionalFamily::vmf: return "vmf";
    case ConditionalFamily::gen_normal: return "gen_normal";
    case ConditionalFamily::trunc_laplace: return "trunc_laplace";
  }
  return "?";
}

ConditionalFamily conditional_family_from_string(const std::string& name) {
  if (name == "vmf") return ConditionalFamily::vmf;
  if (name == "gen_normal") return ConditionalFamily::gen_normal;
  if (name == "trunc_laplace") return ConditionalFamily::trunc_laplace;
  throw Error(Errc::invalid_config, "unknown conditional family '" + name + "'");
}

SphericalConditional SphericalConditional::vmf(double kappa) {
  SphericalConditional c;
  c.family = ConditionalFamily::vmf;
  c.kappa = kappa;
  return c;
}

SphericalConditional SphericalConditional::gen_normal(double alpha, double shape) {
  SphericalConditional c;
  c.family = ConditionalFamily::gen_normal;
  c.alpha = alpha;
  c.shape = shape;
  return c;
}

SphericalConditional SphericalConditional::trunc_laplace(double alpha, double truncation) {
  SphericalConditional c;
  c.family = ConditionalFamily::trunc_laplace;
  c.alpha = alpha;
  c.shape = 1.0;
  c.truncation = truncation;
  return c;
}

void SphericalConditional::validate() const {
  switch (family) {
    case ConditionalFamily::vmf:
      if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw Error(Errc::invalid_parameter, "vMF kappa must be finite and >= 0");
      if (truncation) throw Error(Errc::invalid_parameter, "vMF takes no truncation");
      break;
    case ConditionalFamily::gen_normal:
      if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw Error(Errc::invalid_parameter, "gen-normal alpha must be finite and >= 0");
      if (!(shape > 0.0 && shape <= 4.0))
        throw Error(Errc::invalid_parameter, "gen-normal shape must lie in (0, 4]");
      if (truncation) throw Error(Errc::invalid_parameter, "gen-normal takes no truncation");
      break;
    case ConditionalFamily::trunc_laplace:
      if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw Error(Errc::invalid_parameter, "truncated-Laplace alpha must be finite and >= 0");
      if (shape != 1.0) throw Error(Errc::invalid_parameter, "truncated Laplace has shape 1");
      if (!truncation || !(*truncation > 0.0))
        throw Error(Errc::invalid_parameter, "truncated Laplace needs truncation > 0");
      break;
  }
}

UnitVector sample_uniform_sphere(int d, RngStream& rng) {
  if (d < 2) throw Error(Errc::invalid_dimension, "sphere dimension d must be >= 2");
  Vector g(d);
  for (;;) {
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    if (g.squaredNorm() > 1e-300) break;
  }
  return UnitVector::normalized(g);
}

UnitVector sample_vmf(const UnitVector& mu, double kappa, RngStream& rng) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw Error(Errc::invalid_parameter, "vMF kappa must be finite and >= 0");
  const int d = mu.dim();
  const double dm1 = d - 1.0;

  // Cosine component.
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  double w = 0.0;
  std::uint64_t tries = 0;
  for (;;) {
    if (++tries > kDefaultMaxTries)
      throw SamplingStalled(tries, 0, "vMF cosine rejection did not accept");
    double z = rng.beta(0.5 * dm1, 0.5 * dm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    double u = rng.uniform_open();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  // Tangent direction in the complement of e_1.
  Vector tangent(d - 1);
  if (d == 2) {
    tangent(0) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  } else {
    tangent = sample_uniform_sphere(d - 1, rng).coords();
  }
  Vector sample(d);
  sample(0) = w;
  sample.tail(d - 1) = std::sqrt(std::max(0.0, 1.0 - w * w)) * tangent;

  // Householder reflection H = I - 2 u u^T / ||u||^2 with u = e_1 - mu maps e_1 to mu.
  Vector u = -mu.coords();
  u(0) += 1.0;
  double uu = u.squaredNorm();
  if (uu > 1e-30) sample -= (2.0 * u.dot(sample) / uu) * u;
  return UnitVector::normalized(sample);
}

double vmf_log_normalizer(int d, double kappa) {
  if (d < 2) throw Error(Errc::invalid_dimension, "sphere dimension d must be >= 2");
  if (!(kappa >= 0.0)) throw Error(Errc::invalid_parameter, "vMF kappa must be >= 0");
  const double nu = 0.5 * d - 1.0;
  const double half_d = 0.5 * d;
  if (kappa == 0.0) {
    // minus log of the surface area 2 pi^{d/2} / Gamma(d/2)
    return -(std::log(2.0) + half_d * std::log(std::numbers::pi) - std::lgamma(half_d));
  }
  return nu * std::log(kappa) - half_d * std::log(2.0 * std::numbers::pi) - log_bessel_i(nu, kappa);
}

double vmf_log_density(const UnitVector& z, const UnitVector& mu, double kappa) {
  if (z.dim() != mu.dim()) throw Error(Errc::invalid_dimension, "z and mu differ in dimension");
  return kappa * z.dot(mu) + vmf_log_normalizer(z.dim(), kappa);
}

double conditional_log_weight(const Vector& z, const Vector& mu, const SphericalConditional& cond) {
  if (cond.family == ConditionalFamily::vmf)
    return cond.kappa * z.dot(mu) + vmf_log_normalizer(static_cast<int>(z.size()), cond.kappa);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    double diff = std::abs(mu(k) - z(k));
    if (cond.truncation && diff > *cond.truncation) return -std::numeric_limits<double>::infinity();
    acc += cond.shape == 1.0 ? diff : cond.shape == 2.0 ? diff * diff : std::pow(diff, cond.shape);
  }
  return -cond.alpha * acc;
}

UnitVector sample_spherical_conditional(const UnitVector& mu, const SphericalConditional& cond,
                                        RngStream& rng, std::uint64_t max_tries,
                                        SamplerStats& stats) {
  cond.validate();
  if (max_tries < 1) throw Error(Errc::invalid_parameter, "max_tries must be >= 1");
  if (cond.family == ConditionalFamily::vmf) {
    ++stats.proposals;
    ++stats.accepted;
    return sample_vmf(mu, cond.kappa, rng);
  }
  // Uniform proposal; the weight exp(-alpha ||mu - z||^shape) is at most 1,
  // attained at z = mu, so it is directly the acceptance probability.
  std::uint64_t local_proposals = 0;
  for (std::uint64_t t = 0; t < max_tries; ++t) {
    UnitVector z = sample_uniform_sphere(mu.dim(), rng);
    ++stats.proposals;
    ++local_proposals;
    double log_w = conditional_log_weight(z.coords(), mu.coords(), cond);
    if (log_w == -std::numeric_limits<double>::infinity()) continue;
    if (log_w >= 0.0 || std::log(rng.uniform_open()) < log_w) {
      ++stats.accepted;
      return z;
    }
  }
  throw SamplingStalled(stats.proposals, stats.accepted,
                        "no acceptance in " + std::to_string(local_proposals) +
                            " proposals (empirical acceptance rate " +
                            std::to_string(stats.acceptance_rate()) + ")");
}

UnitVector sample_spherical_conditional(const UnitVector& mu, const SphericalConditional& cond,
                                        RngStream& rng, std::uint64_t max_tries) {
  SamplerStats stats;
  return sample_spherical_conditional(mu, cond, rng, max_tries, stats);
}

}  // namespace idlab
