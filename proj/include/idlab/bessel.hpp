#pragma once

namespace idlab {

/// log I_nu(x) for nu >= 0, x >= 0. Power series evaluated in log space for
/// x < 50, Debye uniform asymptotic expansion beyond. Finite up to x = 1e5.
double log_bessel_i(double nu, double x);

/// Ratio I_{nu+1}(x) / I_nu(x).
double bessel_i_ratio(double nu, double x);

}  // namespace idlab
