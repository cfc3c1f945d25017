#include "idlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace idlab {
namespace {

// Works on a column-major copy: each rotation touches two contiguous columns.
using ColMatrix = Eigen::MatrixXd;

Svd jacobi_tall(const ColMatrix& a, int max_sweeps) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  ColMatrix work = a;
  ColMatrix v = ColMatrix::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double alpha = work.col(p).squaredNorm();
        double beta = work.col(q).squaredNorm();
        double gamma = work.col(p).dot(work.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          double wp = work(i, p);
          double wq = work(i, q);
          work(i, p) = c * wp - s * wq;
          work(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          double vp = v(i, p);
          double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) s(j) = work.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return s(i) > s(j); });

  Svd out;
  out.sweeps = sweep;
  out.s.resize(n);
  out.u = Matrix::Zero(m, n);
  out.v.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.s(k) = s(j);
    out.v.col(k) = v.col(j);
    if (s(j) > 0.0) out.u.col(k) = work.col(j) / s(j);
  }
  return out;
}

}  // namespace

Svd jacobi_svd(const Matrix& a, int max_sweeps) {
  if (a.rows() >= a.cols()) return jacobi_tall(ColMatrix(a), max_sweeps);
  Svd t = jacobi_tall(ColMatrix(a.transpose()), max_sweeps);
  std::swap(t.u, t.v);
  return t;
}

Vector singular_values(const Matrix& a) { return jacobi_svd(a).s; }

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Vector s = singular_values(a);
  if (s(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++rank;
  return rank;
}

double condition_number(const Matrix& a) {
  Vector s = singular_values(a);
  double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix gaussian_matrix(int rows, int cols, RngStream& rng) {
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.normal();
  return g;
}

Matrix random_orthogonal(int n, RngStream& rng) {
  Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

double order_free_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  double comp = 0.0;
  for (double x : values) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace idlab
