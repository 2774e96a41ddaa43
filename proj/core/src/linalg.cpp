#include "mdlm/linalg.hpp"

#include <cmath>
#include <string>

namespace mdlm {

namespace {

constexpr double kJitterRel = 1e-10;
constexpr double kJitterAbs = 1e-30;

// Cholesky-Banachiewicz; returns the index of the first failing pivot, or -1.
int try_cholesky(const Matrix& a, Matrix& l) {
  const int n = static_cast<int>(a.rows());
  l.setZero(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) return j;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      const double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / ljj;
    }
  }
  return -1;
}

}  // namespace

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SpdMatrix::SpdMatrix(Matrix a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("SpdMatrix requires a square matrix, got " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  if (!is_symmetric(a)) {
    throw NotSymmetric("SpdMatrix requires symmetry within 1e-12 relative");
  }
  mat_ = symmetrized(a);
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Matrix::Identity(dim, dim));
}

SpdMatrix SpdMatrix::scaled_identity(int dim, double scale) {
  return SpdMatrix(Matrix(scale * Matrix::Identity(dim, dim)));
}

Matrix cholesky_lower(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("cholesky_lower requires a square matrix");
  }
  const int n = static_cast<int>(a.rows());
  if (n == 0) return Matrix(0, 0);
  Matrix l(n, n);
  int bad = try_cholesky(a, l);
  if (bad < 0) return l;
  const double jitter = kJitterRel * a.trace() / n + kJitterAbs;
  Matrix bumped = a;
  bumped.diagonal().array() += jitter;
  bad = try_cholesky(bumped, l);
  if (bad < 0) return l;
  throw NotPositiveDefinite("cholesky pivot " + std::to_string(bad) +
                            " non-positive after jitter " +
                            std::to_string(jitter));
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionMismatch("spd_solve dimension mismatch");
  }
  const Matrix l = cholesky_lower(a);
  Matrix x = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(x);
}

}  // namespace mdlm
