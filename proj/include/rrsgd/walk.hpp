#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rrsgd/linalg.hpp"

namespace rrsgd {

/// N zero-sum vectors x_1..x_N (stored row-wise) visited in a uniformly random
/// order without replacement.
class WalkSet {
 public:
  // Throws ValidationError unless every component of sum x_i is within
  // 1e-12 (scaled by the largest entry) of zero, or N < 2.
  explicit WalkSet(Matrix vectors);
  // Subtracts the sample mean first.
  static WalkSet centered(Matrix vectors);

  std::size_t size() const noexcept { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }
  const Matrix& vectors() const noexcept { return vectors_; }
  // (1/N) sum ||x_i||^2
  double var() const noexcept { return var_; }
  // (1/N) sum x_i x_i^T
  const Matrix& covariance() const noexcept { return cov_; }

 private:
  Matrix vectors_;
  double var_;
  Matrix cov_;
};

/// E || sum_{j=1..n} beta^{n-j} x_sigma(j) ||^2 in closed form, 1 <= n <= N.
double f_formula(std::size_t n, const WalkSet& x, double beta);
// The same with Var(X) = 1 and only the set size given.
double f_formula_unit(std::size_t n, std::size_t set_size, double beta);

/// E [sum B^{n-j} x_sigma(j)] [sum B^{n-j} x_sigma(j)]^T in closed form. B must
/// be symmetric (asymmetry <= 1e-12).
Matrix F_formula(std::size_t n, const WalkSet& x, const Matrix& B);

inline constexpr std::size_t kExhaustiveLimit = 8;

// Exact averages over all N! orderings; N <= kExhaustiveLimit.
double f_bruteforce(std::size_t n, const WalkSet& x, double beta);
Matrix F_bruteforce(std::size_t n, const WalkSet& x, const Matrix& B);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Averages over `samples` random orderings; any N.
MonteCarloEstimate f_montecarlo(std::size_t n, const WalkSet& x, double beta, std::size_t samples,
                                std::uint64_t seed);

/// f(n; X, beta) for n = 1..N with Var(X) = 1. Element [n-1] holds f(n).
std::vector<double> bell_profile(std::size_t set_size, double beta);

}  // namespace rrsgd
