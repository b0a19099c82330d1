#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "rrsgd/errors.hpp"
#include "rrsgd/linalg.hpp"
#include "rrsgd/rng.hpp"

using namespace rrsgd;

namespace {

Matrix random_symmetric(int m, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Matrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_CASE("jacobi matches a reference eigensolver") {
  for (int m : {1, 2, 3, 5, 10, 20}) {
    CAPTURE(m);
    const Matrix a = random_symmetric(m, static_cast<std::uint64_t>(m));
    const EigenFactorization f = jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    CHECK((f.lambda - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, a.norm()));
    CHECK((f.reconstruct() - a).norm() < 1e-10 * std::max(1.0, a.norm()));
    CHECK((f.U.transpose() * f.U - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 1; i < m; ++i) CHECK(f.lambda(i - 1) <= f.lambda(i));
  }
}

TEST_CASE("jacobi handles diagonal and repeated spectra") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3.0, -1.0, 2.0;
  const EigenFactorization f = jacobi_eigen(d);
  CHECK(f.lambda(0) == doctest::Approx(-1.0));
  CHECK(f.lambda(1) == doctest::Approx(2.0));
  CHECK(f.lambda(2) == doctest::Approx(3.0));

  const EigenFactorization id = jacobi_eigen(Matrix::Identity(4, 4) * 2.5);
  CHECK((id.lambda.array() - 2.5).abs().maxCoeff() < 1e-15);
  CHECK((id.reconstruct() - Matrix::Identity(4, 4) * 2.5).norm() < 1e-14);
}

TEST_CASE("jacobi rejects bad input") {
  CHECK_THROWS_AS(jacobi_eigen(Matrix::Zero(2, 3)), ValidationError);
  Matrix a(2, 2);
  a << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(jacobi_eigen(a), ValidationError);
  CHECK(asymmetry(a) == doctest::Approx(2.0));
  CHECK_THROWS_AS(jacobi_eigen(random_symmetric(8, 3), 1e-12, 0), ConditioningError);
}
