#include "rrsgd/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rrsgd/errors.hpp"
#include "rrsgd/rng.hpp"

namespace rrsgd {

namespace {

void check_step(std::size_t n, std::size_t set_size) {
  if (n < 1 || n > set_size) {
    std::ostringstream msg;
    msg << "walk length n = " << n << " outside [1, " << set_size << "]";
    throw IndexOutOfRangeError(msg.str());
  }
}

void check_exhaustive(std::size_t set_size) {
  if (set_size > kExhaustiveLimit) {
    std::ostringstream msg;
    msg << "exhaustive enumeration limited to N <= " << kExhaustiveLimit << " (got " << set_size << ")";
    throw ValidationError(msg.str());
  }
}

// Calls visit(order) for every permutation of 0..N-1, each exactly once.
template <typename Visit>
std::size_t for_each_permutation(std::size_t set_size, Visit&& visit) {
  std::vector<std::size_t> order(set_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t count = 0;
  do {
    visit(order);
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return count;
}

}  // namespace

WalkSet::WalkSet(Matrix vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() < 2) throw ValidationError("a walk set needs at least 2 vectors");
  if (vectors_.cols() < 1) throw ValidationError("walk vectors need dimension >= 1");
  if (!vectors_.allFinite()) throw ValidationError("walk vectors must be finite");
  const double scale = std::max(1.0, vectors_.cwiseAbs().maxCoeff());
  const Eigen::RowVectorXd total = vectors_.colwise().sum();
  if (total.cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("walk vectors must sum to zero");
  }
  const double n = static_cast<double>(vectors_.rows());
  cov_ = vectors_.transpose() * vectors_ / n;
  var_ = vectors_.squaredNorm() / n;
}

WalkSet WalkSet::centered(Matrix vectors) {
  const Eigen::RowVectorXd mean = vectors.colwise().mean();
  vectors.rowwise() -= mean;
  return WalkSet(std::move(vectors));
}

double f_formula_unit(std::size_t n, std::size_t set_size, double beta) {
  if (set_size < 2) throw ValidationError("f_formula: N must be >= 2");
  check_step(n, set_size);
  if (!(beta >= 0.0)) throw ValidationError("f_formula: beta must be >= 0");
  double power = 1.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += power;
    sum_sq += power * power;
    power *= beta;
  }
  const double big_n = static_cast<double>(set_size);
  // The bracket is a variance of the weights and cannot be negative;
  // clamp the rounding residue left when beta = 1 and n = N.
  return std::max(0.0, (sum_sq * big_n - sum * sum) / (big_n - 1.0));
}

double f_formula(std::size_t n, const WalkSet& x, double beta) {
  return f_formula_unit(n, x.size(), beta) * x.var();
}

Matrix F_formula(std::size_t n, const WalkSet& x, const Matrix& B) {
  check_step(n, x.size());
  const auto d = static_cast<Eigen::Index>(x.dim());
  if (B.rows() != d || B.cols() != d) throw ValidationError("F_formula: B has the wrong shape");
  if (asymmetry(B) > 1e-12) throw ValidationError("F_formula: B must be symmetric");

  const Matrix& R = x.covariance();
  Matrix power = Matrix::Identity(d, d);
  Matrix weighted = Matrix::Zero(d, d);  // sum B^i R B^i
  Matrix power_sum = Matrix::Zero(d, d); // sum B^i
  for (std::size_t i = 0; i < n; ++i) {
    weighted.noalias() += power * R * power.transpose();
    power_sum += power;
    power = (power * B).eval();
  }
  const double big_n = static_cast<double>(x.size());
  Matrix out = (big_n * weighted - power_sum * R * power_sum.transpose()) / (big_n - 1.0);
  return 0.5 * (out + out.transpose());
}

double f_bruteforce(std::size_t n, const WalkSet& x, double beta) {
  check_step(n, x.size());
  check_exhaustive(x.size());
  const Matrix& v = x.vectors();
  double total = 0.0;
  Vector acc(v.cols());
  const std::size_t count = for_each_permutation(x.size(), [&](const std::vector<std::size_t>& order) {
    acc.setZero();
    for (std::size_t j = 0; j < n; ++j) {
      acc = beta * acc + v.row(static_cast<Eigen::Index>(order[j])).transpose();
    }
    total += acc.squaredNorm();
  });
  return total / static_cast<double>(count);
}

Matrix F_bruteforce(std::size_t n, const WalkSet& x, const Matrix& B) {
  check_step(n, x.size());
  check_exhaustive(x.size());
  const auto d = static_cast<Eigen::Index>(x.dim());
  if (B.rows() != d || B.cols() != d) throw ValidationError("F_bruteforce: B has the wrong shape");
  const Matrix& v = x.vectors();
  Matrix total = Matrix::Zero(d, d);
  Vector acc(d);
  const std::size_t count = for_each_permutation(x.size(), [&](const std::vector<std::size_t>& order) {
    acc.setZero();
    for (std::size_t j = 0; j < n; ++j) {
      acc = (B * acc).eval() + v.row(static_cast<Eigen::Index>(order[j])).transpose();
    }
    total.noalias() += acc * acc.transpose();
  });
  return total / static_cast<double>(count);
}

MonteCarloEstimate f_montecarlo(std::size_t n, const WalkSet& x, double beta, std::size_t samples,
                                std::uint64_t seed) {
  check_step(n, x.size());
  if (samples < 2) throw ValidationError("f_montecarlo: need at least 2 samples");
  const Matrix& v = x.vectors();
  const std::size_t size = x.size();
  CounterRng rng(seed, 0);
  std::vector<std::size_t> order(size);
  Vector acc(v.cols());
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Only the first n slots matter: partial Fisher-Yates, low index up.
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(size - i));
      std::swap(order[i], order[j]);
    }
    acc.setZero();
    for (std::size_t j = 0; j < n; ++j) acc = beta * acc + v.row(static_cast<Eigen::Index>(order[j])).transpose();
    const double value = acc.squaredNorm();
    const double delta = value - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (value - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

std::vector<double> bell_profile(std::size_t set_size, double beta) {
  if (set_size < 2) throw ValidationError("bell_profile: N must be >= 2");
  std::vector<double> out(set_size);
  for (std::size_t n = 1; n <= set_size; ++n) out[n - 1] = f_formula_unit(n, set_size, beta);
  return out;
}

}  // namespace rrsgd
