#include "rrsgd/theory.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "rrsgd/errors.hpp"

namespace rrsgd {

namespace {

// H = U diag(lambda) U^T together with R expressed in that basis.
struct Spectral {
  EigenFactorization eig;
  Matrix R_rot;
};

Spectral spectral(const TheoryInputs& in) {
  in.validate();
  Spectral s{jacobi_eigen(in.H), Matrix()};
  if (!(s.eig.lambda(0) > 0.0)) throw ValidationError("theory: H must be positive definite");
  s.R_rot = s.eig.U.transpose() * in.R_s_star * s.eig.U;
  return s;
}

void require_stable_powers(const TheoryInputs& in, const Vector& lambda) {
  const double top = in.mu * lambda(lambda.size() - 1);
  if (!(top < 1.0)) {
    std::ostringstream msg;
    msg << "mu * lambda_max(H) = " << top << " must be < 1";
    throw ConditioningError(msg.str());
  }
}

// Partial-sum weights c_ab(n) = N sum_{i<n} b_a^i b_b^i - (sum_{i<n} b_a^i)(sum_{i<n} b_b^i)
// with b = 1 - mu lambda. Evaluated through d_i = b^i - 1 so the large,
// nearly equal terms never get subtracted:
//   c_ab = n(N-n) + (N-n)(D_a + D_b) + N DD_ab - D_a D_b.
Matrix lemma2_weights(const Vector& lambda, double mu, std::size_t big_n, std::size_t n,
                      bool diagonal_only) {
  const Eigen::Index m = lambda.size();
  Matrix d(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double log_b = std::log1p(-mu * lambda(a));
    for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i), a) = std::expm1(static_cast<double>(i) * log_b);
  }
  const Vector col_sum = d.colwise().sum().transpose();
  const double nn = static_cast<double>(n);
  const double bn = static_cast<double>(big_n);
  Matrix c = Matrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = diagonal_only ? a : 0; b < (diagonal_only ? a + 1 : m); ++b) {
      const double cross = d.col(a).dot(d.col(b));
      c(a, b) = nn * (bn - nn) + (bn - nn) * (col_sum(a) + col_sum(b)) + bn * cross - col_sum(a) * col_sum(b);
    }
  }
  return c;
}

// R' in the eigenbasis of H, for partial length n.
Matrix rotated_noise_cov(const Spectral& s, const TheoryInputs& in, std::size_t n, bool diagonal_only) {
  require_stable_powers(in, s.eig.lambda);
  const Matrix c = lemma2_weights(s.eig.lambda, in.mu, in.N, n, diagonal_only);
  return s.R_rot.cwiseProduct(c) / (static_cast<double>(in.N) - 1.0);
}

double longterm_from(const Spectral& s, const TheoryInputs& in) {
  const Matrix r_prime = rotated_noise_cov(s, in, in.N, true);
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.eig.lambda.size(); ++a) {
    const double log_b = std::log1p(-in.mu * s.eig.lambda(a));
    const double denom = -std::expm1(2.0 * static_cast<double>(in.N) * log_b);
    if (!(denom > 0.0)) {
      throw ConditioningError("I - (I - mu H)^{2N} is numerically singular");
    }
    total += r_prime(a, a) / denom;
  }
  return in.mu * in.mu * total;
}

double uniform_from(const Spectral& s, const TheoryInputs& in) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.eig.lambda.size(); ++a) total += s.R_rot(a, a) / s.eig.lambda(a);
  return 0.5 * in.mu * total;
}

double hyperbolic_from(const Spectral& s, const TheoryInputs& in) {
  const double bn = static_cast<double>(in.N);
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.eig.lambda.size(); ++a) {
    const double lam = s.eig.lambda(a);
    const double factor = bn / (bn - 1.0) * tanh_deficit(in.mu * bn * lam);
    total += factor * s.R_rot(a, a) / lam;
  }
  return 0.5 * in.mu * total;
}

}  // namespace

TheoryInputs TheoryInputs::from_stats(const NoiseStats& stats, double mu, std::size_t n, NuChoice nu_choice) {
  TheoryInputs in;
  in.H = stats.hessian;
  in.R_s_star = stats.R_s_star;
  in.mu = mu;
  in.N = n;
  in.nu = nu_choice == NuChoice::global_bound ? stats.nu : stats.nu_hessian;
  in.delta = stats.delta;
  in.K = stats.K;
  return in;
}

void TheoryInputs::validate() const {
  if (H.rows() < 1 || H.rows() != H.cols()) throw ValidationError("theory: H must be square and nonempty");
  if (R_s_star.rows() != H.rows() || R_s_star.cols() != H.cols()) {
    throw ValidationError("theory: R_s_star must match H in shape");
  }
  require_symmetric(H, 1e-10, "theory: H");
  require_symmetric(R_s_star, 1e-10, "theory: R_s_star");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("theory: mu must be positive");
  if (N < 2) throw ValidationError("theory: N must be >= 2");
  if (!(nu > 0.0)) throw ValidationError("theory: nu must be positive");
  if (!(delta > 0.0)) throw ValidationError("theory: delta must be positive");
  if (!(K >= 0.0)) throw ValidationError("theory: K must be nonnegative");
}

Matrix noise_cov_prime(const TheoryInputs& in) { return noise_cov_prime_partial(in, in.N); }

Matrix noise_cov_prime_partial(const TheoryInputs& in, std::size_t i) {
  if (i < 1 || i > in.N) {
    std::ostringstream msg;
    msg << "noise_cov_prime_partial: i = " << i << " outside [1, " << in.N << "]";
    throw IndexOutOfRangeError(msg.str());
  }
  const Spectral s = spectral(in);
  const Matrix rotated = rotated_noise_cov(s, in, i, false);
  Matrix out = s.eig.U * rotated * s.eig.U.transpose();
  return 0.5 * (out + out.transpose());
}

double msd_rr_longterm(const TheoryInputs& in) { return longterm_from(spectral(in), in); }

double msd_uniform(const TheoryInputs& in) { return uniform_from(spectral(in), in); }

double msd_infinite_horizon(const TheoryInputs& in) { return msd_uniform(in); }

PerIterationBound msd_rr_periter_terms(const TheoryInputs& in, std::size_t i) {
  if (!theorem3_step_ok(in)) {
    std::ostringstream msg;
    msg << "per-iteration bound needs mu <= 2/(delta + nu) = " << 2.0 / (in.delta + in.nu);
    throw StepSizeError(msg.str());
  }
  if (i > in.N) {
    throw IndexOutOfRangeError("msd_rr_periter_bound: i must lie in [0, N]");
  }
  const Spectral s = spectral(in);
  PerIterationBound out;
  out.msd_lt = longterm_from(s, in);
  out.eta = std::pow(1.0 - in.mu * in.nu, 2.0 * static_cast<double>(i));
  out.value = out.eta * out.msd_lt;
  if (i == 0) return out;

  const Matrix r_partial = rotated_noise_cov(s, in, i, true);
  const double collapsed = in.mu * in.mu * r_partial.trace();
  out.value += collapsed;
  const double weight = 1.0 - out.eta;
  out.msd_lt_i = weight > 0.0 ? collapsed / weight : 0.0;
  return out;
}

double msd_rr_periter_bound(const TheoryInputs& in, std::size_t i) { return msd_rr_periter_terms(in, i).value; }

double tanh_deficit(double x) {
  const double ax = std::abs(x);
  if (ax < 0.05) {
    const double x2 = x * x;
    return x2 * (1.0 / 12.0 + x2 * (-1.0 / 120.0 + x2 * (17.0 / 20160.0 - x2 * 62.0 / 725760.0)));
  }
  return 1.0 - 2.0 / x * std::tanh(0.5 * x);
}

double m_rr_factor(double mu, std::size_t n) {
  if (n < 2) throw ValidationError("m_rr_factor: N must be >= 2");
  if (!(mu > 0.0)) throw ValidationError("m_rr_factor: mu must be positive");
  const double bn = static_cast<double>(n);
  return bn / (bn - 1.0) * tanh_deficit(mu * bn);
}

double msd_rr_hyperbolic(const TheoryInputs& in) { return hyperbolic_from(spectral(in), in); }

double msd_periter_hyperbolic(const TheoryInputs& in, std::size_t i) {
  if (i < 1 || i > in.N) throw IndexOutOfRangeError("msd_periter_hyperbolic: i must lie in [1, N]");
  const Spectral s = spectral(in);
  const double bn = static_cast<double>(in.N);
  const double ratio = static_cast<double>(i) / bn;
  double partial = 0.0;
  for (Eigen::Index a = 0; a < s.eig.lambda.size(); ++a) {
    const double lam = s.eig.lambda(a);
    // 1 - (2/(mu N lam)) tanh(mu i lam / 2) = 1 - (i/N)(1 - tanh_deficit(mu i lam)).
    const double factor = bn / (bn - 1.0) * (1.0 - ratio * (1.0 - tanh_deficit(in.mu * static_cast<double>(i) * lam)));
    partial += factor * s.R_rot(a, a) / lam;
  }
  partial *= 0.5 * in.mu;
  const double decay = std::exp(-2.0 * in.mu * static_cast<double>(i));
  return decay * hyperbolic_from(s, in) + (1.0 - decay) * partial;
}

double quadratic_closed_form(double mu, std::size_t n, double var_x) {
  if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("quadratic_closed_form: need 0 < mu < 1");
  if (n < 2) throw ValidationError("quadratic_closed_form: N must be >= 2");
  const double bn = static_cast<double>(n);
  const double q = std::exp(bn * std::log1p(-mu));  // (1 - mu)^N
  const double first = bn / (2.0 * mu - mu * mu);
  const double second = -std::expm1(bn * std::log1p(-mu)) / (mu * mu * (1.0 + q));
  return mu * mu / (bn - 1.0) * (first - second) * var_x;
}

double quadratic_closed_form_tanh(double mu, std::size_t n, double var_x) {
  return 0.5 * mu * m_rr_factor(mu, n) * var_x;
}

double stability_bound(const TheoryInputs& in) {
  in.validate();
  const double bn = static_cast<double>(in.N);
  return 4.0 * in.mu * in.mu * in.delta * in.delta * bn * bn * in.K / (in.nu * in.nu);
}

bool theorem1_step_ok(const TheoryInputs& in) {
  return in.mu <= in.nu / (3.0 * in.delta * in.delta * static_cast<double>(in.N));
}

bool theorem2_step_ok(const TheoryInputs& in) { return in.mu * in.delta <= 1.0; }

bool theorem3_step_ok(const TheoryInputs& in) { return in.mu <= 2.0 / (in.delta + in.nu); }

double rate_alpha_theorem1(const TheoryInputs& in) {
  in.validate();
  return 1.0 - in.mu * in.nu * static_cast<double>(in.N) / 2.0;
}

double rate_alpha_theorem2(const TheoryInputs& in) {
  const Spectral s = spectral(in);
  require_stable_powers(in, s.eig.lambda);
  return std::exp(2.0 * static_cast<double>(in.N) * std::log1p(-in.mu * s.eig.lambda(0)));
}

double mismatch_bound(const TheoryInputs& in) {
  return stability_bound(in) / (static_cast<double>(in.N) - 1.0);
}

}  // namespace rrsgd
