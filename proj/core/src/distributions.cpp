#include "mdlm/distributions.hpp"

#include <string>

namespace mdlm {

void MatrixNormalParams::validate() const {
  if (mean.rows() == 0 || mean.cols() == 0) {
    throw DimensionMismatch("matrix normal mean must be non-empty");
  }
  if (row_cov.dim() != p()) {
    throw DimensionMismatch("row covariance is " + std::to_string(row_cov.dim()) +
                            "-dim but mean has " + std::to_string(p()) + " rows");
  }
  if (col_cov.dim() != q()) {
    throw DimensionMismatch("column covariance is " +
                            std::to_string(col_cov.dim()) + "-dim but mean has " +
                            std::to_string(q()) + " columns");
  }
}

Matrix sample_matrix_normal(const MatrixNormalParams& params, Rng& rng) {
  params.validate();
  const int p = params.p();
  const int q = params.q();
  const Matrix a = cholesky_lower(params.row_cov);
  const Matrix b = cholesky_lower(params.col_cov);
  Matrix z(p, q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
  }
  return params.mean + a * z * b.transpose();
}

Vector sample_mvn(const Vector& mean, const SpdMatrix& cov, Rng& rng) {
  if (cov.dim() != mean.size()) {
    throw DimensionMismatch("mvn covariance is " + std::to_string(cov.dim()) +
                            "-dim but mean has " + std::to_string(mean.size()) +
                            " entries");
  }
  const Matrix b = cholesky_lower(cov);
  Vector z(mean.size());
  for (int j = 0; j < z.size(); ++j) z(j) = rng.normal();
  return mean + b * z;
}

SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, Rng& rng) {
  const int q = scale.dim();
  if (q == 0) throw DimensionMismatch("inverse-Wishart scale must be non-empty");
  if (!(dof > q - 1)) {
    throw DofTooSmall("inverse-Wishart dof " + std::to_string(dof) +
                      " must exceed q - 1 = " + std::to_string(q - 1));
  }
  // Sigma = L (A A')^{-1} L' with L = chol(dof * scale) and A the Bartlett
  // factor.  Rather than inverting, solve A T = L' and return T' T.
  const Matrix l = cholesky_lower(Matrix(dof * scale.mat()));
  Matrix a = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
    a(i, i) = std::sqrt(rng.chi_square(dof - i));
  }
  const Matrix t =
      a.triangularView<Eigen::Lower>().solve(Matrix(l.transpose()));
  return SpdMatrix(symmetrized(t.transpose() * t));
}

}  // namespace mdlm
