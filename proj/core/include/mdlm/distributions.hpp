#pragma once

#include "mdlm/linalg.hpp"
#include "mdlm/rng.hpp"

// Matrix-variate sampling.  A matrix-normal draw X ~ N[M, C, S] (row
// covariance C, column covariance S) is M + A Z B' with A = chol(C),
// B = chol(S) and Z a matrix of iid standard normals.  Z is always filled
// row by row, left to right, so a draw consumes the stream in a fixed,
// documented order.

namespace mdlm {

struct MatrixNormalParams {
  Matrix mean;        // p x q
  SpdMatrix row_cov;  // p x p
  SpdMatrix col_cov;  // q x q
  // True when these moments came from a Student-T posterior whose dof fell
  // below the normal-approximation threshold; carried along so downstream
  // consumers can surface it.
  bool degraded = false;

  int p() const { return static_cast<int>(mean.rows()); }
  int q() const { return static_cast<int>(mean.cols()); }
  void validate() const;
};

Matrix sample_matrix_normal(const MatrixNormalParams& params, Rng& rng);

// p = 1 special case: mean + chol(cov) z, same stream order as the matrix
// form.
Vector sample_mvn(const Vector& mean, const SpdMatrix& cov, Rng& rng);

// Inverse-Wishart with mean scale * dof / (dof - q - 1) for dof > q + 1,
// i.e. scale matrix Psi = dof * scale.  Bartlett construction; fractional
// dof is accepted down to dof > q - 1.  Stream order: for each row i of the
// Bartlett factor, off-diagonals left to right, then the chi-square diagonal.
SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, Rng& rng);

}  // namespace mdlm
