#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "idlab/rng.hpp"

namespace idlab {

/// Row-major dense matrix; rows are samples throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Thin SVD, A = U diag(s) V^T with s sorted descending.
struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD. Accurate to working precision for the
/// small matrices used in probing (up to a few dozen columns).
Svd jacobi_svd(const Matrix& a, int max_sweeps = 80);

Vector singular_values(const Matrix& a);

/// Rank with singular values above rel_tol * sigma_max.
int numerical_rank(const Matrix& a, double rel_tol = 1e-8);

double condition_number(const Matrix& a);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(int n, RngStream& rng);

Matrix gaussian_matrix(int rows, int cols, RngStream& rng);

/// Sum that does not depend on the order of its inputs: values are sorted
/// before compensated accumulation.
double order_free_sum(std::vector<double> values);

}  // namespace idlab
