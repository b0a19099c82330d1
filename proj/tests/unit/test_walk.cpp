#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rrsgd/errors.hpp"
#include "rrsgd/rng.hpp"
#include "rrsgd/walk.hpp"

using namespace rrsgd;

namespace {

WalkSet random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Matrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal();
  return WalkSet::centered(v);
}

Matrix random_psd(std::size_t d, std::uint64_t seed) {
  CounterRng rng(seed, 1);
  Matrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  return 0.3 * a * a.transpose() / static_cast<double>(d);
}

WalkSet scalar_set(std::initializer_list<double> values) {
  Matrix v(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double x : values) v(i++, 0) = x;
  return WalkSet(v);
}

}  // namespace

TEST_CASE("walk set construction") {
  const WalkSet s = scalar_set({-1.0, 0.0, 1.0});
  CHECK(s.size() == 3);
  CHECK(s.dim() == 1);
  CHECK(s.var() == doctest::Approx(2.0 / 3.0));
  const WalkSet r = random_set(6, 3, 1);
  CHECK(std::abs(r.var() - r.covariance().trace()) < 1e-12);
  CHECK(r.vectors().colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(scalar_set({1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(scalar_set({0.0}), ValidationError);
}

TEST_CASE("three-point example") {
  // Six orders of {-1, 0, 1}, n = 2: (beta*x1 + x2)^2 is 1 when x1 = 0 and
  // 0.25 otherwise.
  const WalkSet s = scalar_set({-1.0, 0.0, 1.0});
  CHECK(f_formula(2, s, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f_bruteforce(2, s, 0.5) == doctest::Approx(0.5).epsilon(1e-14));

  std::vector<double> x = {-1.0, 0.0, 1.0};
  std::vector<int> p = {0, 1, 2};
  double total = 0.0;
  int count = 0;
  do {
    const double v = 0.5 * x[p[0]] + x[p[1]];
    total += v * v;
    ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  CHECK(count == 6);
  CHECK(total / count == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("edge values") {
  const WalkSet s = random_set(7, 2, 3);
  for (double beta : {0.0, 0.4, 1.0, 1.7}) CHECK(f_formula(1, s, beta) == doctest::Approx(s.var()).epsilon(1e-12));
  CHECK(std::abs(f_formula(7, s, 1.0)) < 1e-12);
  CHECK(std::abs(f_bruteforce(7, s, 1.0)) < 1e-12);
  for (std::size_t n = 1; n <= 7; ++n) CHECK(f_formula(n, s, 0.0) == doctest::Approx(s.var()).epsilon(1e-12));

  Matrix two(2, 2);
  two << 0.7, -1.3, -0.7, 1.3;
  const WalkSet pair(two);
  for (double beta : {0.0, 0.25, 0.9, 1.0})
    CHECK(f_formula(2, pair, beta) == doctest::Approx((1 - beta) * (1 - beta) * pair.var()).epsilon(1e-12));

  CHECK_THROWS_AS(f_formula(0, s, 0.5), IndexOutOfRangeError);
  CHECK_THROWS_AS(f_formula(8, s, 0.5), IndexOutOfRangeError);
  CHECK_THROWS_AS(f_formula(1, s, -0.1), ValidationError);
}

TEST_CASE("closed form equals exhaustive enumeration") {
  for (std::size_t n_set = 2; n_set <= 6; ++n_set) {
    const WalkSet s = random_set(n_set, 2, 10 + n_set);
    for (std::size_t n = 1; n <= n_set; ++n)
      for (double beta : {0.0, 0.3, 0.9, 1.0}) {
        CAPTURE(n_set);
        CAPTURE(n);
        CAPTURE(beta);
        CHECK(std::abs(f_formula(n, s, beta) - f_bruteforce(n, s, beta)) < 1e-10);
      }
  }
}

TEST_CASE("matrix form") {
  const WalkSet s = random_set(4, 2, 5);
  const Matrix B = random_psd(2, 6);
  for (std::size_t n = 1; n <= 4; ++n) {
    const Matrix f = F_formula(n, s, B);
    const Matrix b = F_bruteforce(n, s, B);
    CHECK((f - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(asymmetry(f) < 1e-12);
  }
  CHECK((F_formula(1, s, B) - s.covariance()).cwiseAbs().maxCoeff() < 1e-12);

  const WalkSet t = random_set(6, 3, 8);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const Matrix f = F_formula(n, t, beta * Matrix::Identity(3, 3));
      CHECK(std::abs(f.trace() - f_formula(n, t, beta)) < 1e-12);
    }
    // B = 0: only the last draw survives.
    CHECK((F_formula(n, t, Matrix::Zero(3, 3)) - t.covariance()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((F_bruteforce(n, t, Matrix::Zero(3, 3)) - t.covariance()).cwiseAbs().maxCoeff() < 1e-12);
  }
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(F_formula(2, t, bad), ValidationError);
  CHECK_THROWS_AS(F_formula(2, t, Matrix::Identity(2, 2)), ValidationError);
}

TEST_CASE("walk returns to the origin") {
  const WalkSet s = random_set(5, 2, 12);
  std::vector<std::size_t> p(5);
  std::iota(p.begin(), p.end(), 0);
  do {
    Vector acc = Vector::Zero(2);
    for (std::size_t i : p) acc += s.vectors().row(static_cast<Eigen::Index>(i)).transpose();
    CHECK(acc.cwiseAbs().maxCoeff() < 1e-12);
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST_CASE("exhaustive cutoff") {
  const WalkSet big = random_set(9, 1, 2);
  CHECK_THROWS_AS(f_bruteforce(3, big, 0.5), ValidationError);
  CHECK_THROWS_AS(F_bruteforce(3, big, Matrix::Identity(1, 1)), ValidationError);
  CHECK_NOTHROW(f_bruteforce(3, random_set(8, 1, 2), 0.5));
}

TEST_CASE("monte carlo at N = 20") {
  // beta = 1 gives n(N - n)/(N - 1) Var.
  Matrix v(20, 1);
  for (Eigen::Index i = 0; i < 20; ++i) v(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
  const WalkSet s(v);
  const MonteCarloEstimate est = f_montecarlo(10, s, 1.0, 100000, 4);
  CHECK(est.samples == 100000);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.value - 100.0 / 19.0) < 3.0 * est.std_error);
  CHECK(f_formula(10, s, 1.0) == doctest::Approx(100.0 / 19.0).epsilon(1e-12));
  CHECK(f_montecarlo(10, s, 1.0, 1000, 4).value == f_montecarlo(10, s, 1.0, 1000, 4).value);
}

TEST_CASE("bell profile") {
  const auto p = bell_profile(20, 1.0);
  REQUIRE(p.size() == 20);
  for (std::size_t n = 1; n <= 20; ++n) CHECK(p[n - 1] == doctest::Approx(n * (20.0 - n) / 19.0).epsilon(1e-12));
  for (std::size_t n = 1; n < 20; ++n) CHECK(std::abs(p[n - 1] - p[20 - n - 1]) < 1e-12);
  CHECK(std::max_element(p.begin(), p.end()) - p.begin() == 9);
  CHECK(std::abs(p[19]) < 1e-12);
  for (double v : bell_profile(20, 0.0)) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  for (double beta : {0.2, 0.8, 1.0, 1.5}) CHECK(bell_profile(7, beta)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f_formula_unit(4, 9, 0.6) == doctest::Approx(f_formula(4, random_set(9, 2, 1), 0.6) / random_set(9, 2, 1).var()));
  CHECK_THROWS_AS(bell_profile(1, 1.0), ValidationError);
}
