#include "rrsgd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rrsgd/errors.hpp"

namespace rrsgd {

double asymmetry(const Matrix& A) {
  if (A.rows() != A.cols()) return INFINITY;
  if (A.size() == 0) return 0.0;
  return (A - A.transpose()).cwiseAbs().maxCoeff();
}

void require_symmetric(const Matrix& A, double tol, const char* what) {
  if (A.rows() != A.cols()) {
    throw ValidationError(std::string(what) + " must be square");
  }
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (asymmetry(A) > tol * scale) {
    throw ValidationError(std::string(what) + " must be symmetric");
  }
}

EigenFactorization jacobi_eigen(const Matrix& input, double tol, int max_sweeps) {
  require_symmetric(input, 1e-12, "jacobi_eigen input");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double norm = a.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  bool converged = norm == 0.0 || off_norm() <= tol * norm;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q); small-angle form of tan.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= tol * norm;
  }
  if (!converged) {
    throw ConditioningError("jacobi_eigen: off-diagonal mass did not vanish within " +
                            std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  EigenFactorization out{Matrix(n, n), Vector(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.lambda(k) = a(order[k], order[k]);
    out.U.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace rrsgd
