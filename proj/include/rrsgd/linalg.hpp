#pragma once

#include <Eigen/Dense>

namespace rrsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric eigendecomposition `H = U diag(lambda) U^T`, eigenvalues in
/// ascending order, `U` orthogonal.
struct EigenFactorization {
  Matrix U;
  Vector lambda;

  Matrix reconstruct() const { return U * lambda.asDiagonal() * U.transpose(); }
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `tol * ||A||_F`. Throws ValidationError for non-square or non-symmetric
/// input and ConditioningError if `max_sweeps` is exhausted.
EigenFactorization jacobi_eigen(const Matrix& A, double tol = 1e-12, int max_sweeps = 100);

// Largest |A - A^T| entry.
double asymmetry(const Matrix& A);

void require_symmetric(const Matrix& A, double tol, const char* what);

}  // namespace rrsgd
