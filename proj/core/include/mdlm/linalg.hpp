#pragma once

#include <Eigen/Dense>

#include "mdlm/errors.hpp"

namespace mdlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// max |a - a'| <= tol * max(1, max |a|)
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

inline Matrix symmetrized(const Matrix& a) {
  return 0.5 * (a + a.transpose());
}

// A symmetric matrix intended to be positive definite: row/column covariances
// and scale matrices.  Construction checks squareness and symmetry (to 1e-12
// relative) and stores the symmetrized part; definiteness itself is
// established lazily by cholesky_lower at the point of use.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix a);

  static SpdMatrix identity(int dim);
  static SpdMatrix scaled_identity(int dim, double scale);

  const Matrix& mat() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

 private:
  Matrix mat_;
};

// Lower Cholesky factor.  If a pivot is non-positive the factorization is
// retried once with jitter 1e-10 * trace/dim + 1e-30 added to the diagonal
// (the absolute term keeps exact-zero matrices factorizable, which the
// discount-one evolution noise produces by design); a second failure throws
// NotPositiveDefinite naming the pivot.
Matrix cholesky_lower(const Matrix& a);

inline Matrix cholesky_lower(const SpdMatrix& a) {
  return cholesky_lower(a.mat());
}

// Solves a x = b with a symmetric positive definite, via cholesky_lower.
Matrix spd_solve(const Matrix& a, const Matrix& b);

}  // namespace mdlm
