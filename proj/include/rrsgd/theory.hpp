#pragma once

#include <cstddef>

#include "rrsgd/linalg.hpp"
#include "rrsgd/model.hpp"

namespace rrsgd {

// Which strong-convexity constant feeds the nu-dependent predictors.
enum class NuChoice { global_bound, hessian_min };

/// Everything the steady-state predictors consume.
struct TheoryInputs {
  Matrix H;         // Hessian of the risk at w*, symmetric positive definite
  Matrix R_s_star;  // gradient-noise covariance at w*, symmetric PSD
  double mu = 0.0;
  std::size_t N = 0;
  double nu = 0.0;
  double delta = 0.0;
  double K = 0.0;

  static TheoryInputs from_stats(const NoiseStats& stats, double mu, std::size_t n,
                                 NuChoice nu_choice = NuChoice::global_bound);

  // Throws ValidationError on shape/sign violations.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Gradient-noise covariance of the epoch-aggregated noise under reshuffling
//   R' = [N sum_{i<n} (I-muH)^i R (I-muH)^i - (sum_{i<n} (I-muH)^i) R (sum ...)] / (N-1)
// evaluated in the eigenbasis of H. All predictors below require
// mu * lambda_max(H) < 1 and throw ConditioningError otherwise.
// ---------------------------------------------------------------------------

Matrix noise_cov_prime(const TheoryInputs& in);
// Partial-epoch version with sums over j < i; 1 <= i <= N.
Matrix noise_cov_prime_partial(const TheoryInputs& in, std::size_t i);

/// Steady-state epoch-start MSD of the long-term model,
/// mu^2 Tr((I - (I - mu H)^{2N})^{-1} R'), leading term only.
double msd_rr_longterm(const TheoryInputs& in);

/// (mu/2) Tr(H^{-1} R_s*).
double msd_uniform(const TheoryInputs& in);

/// Same expression as msd_uniform: the N -> infinity limit of msd_rr_longterm.
double msd_infinite_horizon(const TheoryInputs& in);

/// Decomposition of the per-iteration upper bound
///   bound(i) = eta_i * msd_lt + (1 - eta_i) * msd_lt_i,   eta_i = (1 - mu nu)^{2i}
/// where (1 - eta_i) * msd_lt_i collapses to mu^2 Tr(R'_i).
struct PerIterationBound {
  double eta = 1.0;
  double msd_lt = 0.0;
  double msd_lt_i = 0.0;  // 0 at i = 0, where it does not enter
  double value = 0.0;
};

// 0 <= i <= N; requires mu <= 2 / (delta + nu) (StepSizeError otherwise).
PerIterationBound msd_rr_periter_terms(const TheoryInputs& in, std::size_t i);
double msd_rr_periter_bound(const TheoryInputs& in, std::size_t i);

// 1 - (2/x) tanh(x/2), accurate for small x.
double tanh_deficit(double x);

/// N/(N-1) (1 - (2/(mu N)) tanh(mu N / 2)).
double m_rr_factor(double mu, std::size_t n);

/// (mu/2) Tr(M_RR Lambda^{-1} U^T R_s* U) with diagonal
/// M_RR = N/(N-1) [I - (2/(mu N)) Lambda^{-1} tanh(mu N Lambda / 2)].
double msd_rr_hyperbolic(const TheoryInputs& in);

/// Hyperbolic per-iteration profile, 1 <= i <= N:
///   e^{-2 mu i} msd_rr_hyperbolic + (1 - e^{-2 mu i}) (mu/2) Tr(M_RR(i) Lambda^{-1} U^T R U)
/// with tanh(mu i Lambda / 2) in M_RR(i).
double msd_periter_hyperbolic(const TheoryInputs& in, std::size_t i);

/// Exact epoch-start MSD for an orthonormal-design quadratic risk (A^T A = I):
///   mu^2/(N-1) [N/(2mu - mu^2) - (1-(1-mu)^N)/(mu^2 (1+(1-mu)^N))] Var(x).
/// Requires 0 < mu < 1.
double quadratic_closed_form(double mu, std::size_t n, double var_x);
// Its tanh simplification (mu/2) m_RR Var(x).
double quadratic_closed_form_tanh(double mu, std::size_t n, double var_x);

/// Starting-point bound 4 mu^2 delta^2 N^2 K / nu^2.
double stability_bound(const TheoryInputs& in);
// mu <= nu / (3 delta^2 N), the regime where stability_bound is proven.
bool theorem1_step_ok(const TheoryInputs& in);
// mu <= 1 / delta.
bool theorem2_step_ok(const TheoryInputs& in);
// mu <= 2 / (delta + nu).
bool theorem3_step_ok(const TheoryInputs& in);

// 1 - mu nu N / 2.
double rate_alpha_theorem1(const TheoryInputs& in);
// (1 - mu lambda_min(H))^{2N}.
double rate_alpha_theorem2(const TheoryInputs& in);

/// Long-term vs real mismatch bound 4 mu^2 delta^2 N^2 K / (nu^2 (N-1)).
double mismatch_bound(const TheoryInputs& in);

}  // namespace rrsgd
