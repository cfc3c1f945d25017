#include "idlab/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "idlab/errors.hpp"

namespace idlab {
namespace {

constexpr double kSeriesCutoff = 50.0;

// log of sum_k (x^2/4)^k / (k! (nu+1)_k), accumulated relative to the running
// largest term so that no intermediate overflows.
double log_series_sum(double nu, double x) {
  const double q = 0.25 * x * x;
  const double log_q = std::log(q);
  const double peak = 0.5 * x + 1.0;
  double log_term = 0.0;
  double log_max = 0.0;
  double scaled_sum = 1.0;  // sum of exp(log_term - log_max)
  for (int k = 1; k < 100000; ++k) {
    log_term += log_q - std::log(static_cast<double>(k)) - std::log(nu + k);
    if (log_term > log_max) {
      scaled_sum = scaled_sum * std::exp(log_max - log_term) + 1.0;
      log_max = log_term;
    } else {
      double rel = std::exp(log_term - log_max);
      scaled_sum += rel;
      if (rel < 1e-18 * scaled_sum && k > peak) break;
    }
  }
  return log_max + std::log(scaled_sum);
}

double log_bessel_series(double nu, double x) {
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_series_sum(nu, x);
}

// Debye expansion written in p = 1/sqrt(nu^2 + x^2) and s = t^2 with
// t = nu * p, so u_k(t)/nu^k = p^k P_k(s) stays finite at nu = 0 (where it
// reduces to the Hankel large-argument series).
double log_bessel_debye(double nu, double x) {
  const double r2 = nu * nu + x * x;
  const double r = std::sqrt(r2);
  const double p = 1.0 / r;
  const double t = nu * p;
  const double s = t * t;
  const double p1 = (3.0 - 5.0 * s) / 24.0;
  const double p2 = (81.0 - 462.0 * s + 385.0 * s * s) / 1152.0;
  const double p3 = (30375.0 - 369603.0 * s + 765765.0 * s * s - 425425.0 * s * s * s) / 414720.0;
  const double p4 = (4465125.0 - 94121676.0 * s + 349922430.0 * s * s - 446185740.0 * s * s * s +
                     185910725.0 * s * s * s * s) /
                    39813120.0;
  const double series = 1.0 + p * (p1 + p * (p2 + p * (p3 + p * p4)));
  double eta_term = r;
  if (nu > 0.0) eta_term += nu * std::log(x / (nu + r));
  return eta_term - 0.5 * std::log(2.0 * std::numbers::pi) - 0.25 * std::log(r2) +
         std::log(series);
}

}  // namespace

double log_bessel_i(double nu, double x) {
  if (!(nu >= 0.0) || !(x >= 0.0))
    throw Error(Errc::invalid_parameter, "log_bessel_i requires nu >= 0 and x >= 0");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x < kSeriesCutoff) return log_bessel_series(nu, x);
  return log_bessel_debye(nu, x);
}

double bessel_i_ratio(double nu, double x) {
  if (x == 0.0) return 0.0;
  return std::exp(log_bessel_i(nu + 1.0, x) - log_bessel_i(nu, x));
}

}  // namespace idlab
