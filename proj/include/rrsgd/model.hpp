#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "rrsgd/linalg.hpp"

namespace rrsgd {

enum class DatasetKind { labeled, targets };

/// N samples stored row-wise. A labeled dataset carries features h_n and
/// labels in {-1, +1}; a targets dataset carries the vectors x_n of a
/// least-squares risk and no labels.
class Dataset {
 public:
  static Dataset labeled(Matrix features, Vector labels);
  static Dataset with_targets(Matrix targets);

  DatasetKind kind() const noexcept { return kind_; }
  std::size_t n_samples() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  const Matrix& rows() const noexcept { return rows_; }
  const Vector& labels() const noexcept { return labels_; }
  double positive_fraction() const;

 private:
  Dataset(DatasetKind kind, Matrix rows, Vector labels);

  DatasetKind kind_;
  Matrix rows_;
  Vector labels_;
};

// Paper-style synthetic logistic data: per-coordinate scales drawn from
// U(1, 10), features N(0, diag(scales)), labels from a logistic link on a
// hidden N(0, I) direction. Deterministic in `seed`.
Dataset synth_logistic_dataset(std::size_t n, std::size_t m, std::uint64_t seed);

// Targets x_n ~ N(0, I_p). Used for least-squares experiments.
Dataset synth_targets_dataset(std::size_t n, std::size_t p, std::uint64_t seed);

// Random p x m matrix with orthonormal columns (p >= m).
Matrix random_orthonormal(std::size_t p, std::size_t m, std::uint64_t seed);

enum class ModelKind { quadratic, logistic };

std::string_view to_string(ModelKind kind) noexcept;

/// Empirical risk J(w) = (1/N) sum_n Q(w; x_n) with per-sample access.
///
/// Implementations are immutable after construction; every method is a pure
/// function of its arguments and may be called concurrently.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual ModelKind kind() const noexcept = 0;
  virtual std::size_t n_samples() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;

  virtual double sample_loss(const Vector& w, std::size_t n) const = 0;
  // Writes grad Q(w; x_n) into `out` (resized by the caller to dim()).
  virtual void sample_gradient_into(const Vector& w, std::size_t n, Vector& out) const = 0;
  virtual Matrix sample_hessian(const Vector& w, std::size_t n) const = 0;
  // Lipschitz constant delta_n of grad Q(.; x_n).
  virtual double sample_lipschitz(std::size_t n) const = 0;
  // Global strong-convexity constant nu of J.
  virtual double strong_convexity() const = 0;

  Vector sample_gradient(const Vector& w, std::size_t n) const;
  double risk(const Vector& w) const;
  // Average of the sample gradients, so the zero-sum noise property holds
  // to rounding at every w.
  Vector full_gradient(const Vector& w) const;
  Matrix hessian(const Vector& w) const;
  // s_n(w) = grad Q(w; x_n) - grad J(w).
  Vector gradient_noise(const Vector& w, std::size_t n) const;

 protected:
  void check_index(std::size_t n) const;
  void check_point(const Vector& w) const;
};

/// J(w) = 1/(2N) sum_n ||A w - x_n||^2 with A of full column rank.
class QuadraticModel final : public LossModel {
 public:
  QuadraticModel(Matrix design, const Dataset& targets);

  ModelKind kind() const noexcept override { return ModelKind::quadratic; }
  std::size_t n_samples() const noexcept override { return static_cast<std::size_t>(targets_.rows()); }
  std::size_t dim() const noexcept override { return static_cast<std::size_t>(design_.cols()); }

  double sample_loss(const Vector& w, std::size_t n) const override;
  void sample_gradient_into(const Vector& w, std::size_t n, Vector& out) const override;
  Matrix sample_hessian(const Vector& w, std::size_t n) const override;
  double sample_lipschitz(std::size_t n) const override;
  double strong_convexity() const override { return lambda_min_; }

  const Matrix& design() const noexcept { return design_; }
  const Matrix& gram() const noexcept { return gram_; }
  // (A^T A)^{-1} A^T x_bar.
  Vector closed_form_minimizer() const;
  // (1/N) sum (x_n - x_bar)(x_n - x_bar)^T.
  Matrix target_covariance() const;

 private:
  Matrix design_;
  Matrix targets_;     // N x p
  Matrix projected_;   // N x M, row n = (A^T x_n)^T
  Matrix gram_;        // A^T A
  double lambda_min_;
  double lambda_max_;
};

/// Q(w; h_n, g_n) = rho ||w||^2 + ln(1 + exp(-g_n h_n^T w)).
class LogisticModel final : public LossModel {
 public:
  LogisticModel(const Dataset& data, double rho);

  ModelKind kind() const noexcept override { return ModelKind::logistic; }
  std::size_t n_samples() const noexcept override { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const noexcept override { return static_cast<std::size_t>(features_.cols()); }

  double sample_loss(const Vector& w, std::size_t n) const override;
  void sample_gradient_into(const Vector& w, std::size_t n, Vector& out) const override;
  Matrix sample_hessian(const Vector& w, std::size_t n) const override;
  // 2 rho + ||h_n||^2 / 4.
  double sample_lipschitz(std::size_t n) const override;
  // 2 rho.
  double strong_convexity() const override { return 2.0 * rho_; }

  double rho() const noexcept { return rho_; }

 private:
  Matrix features_;
  Vector labels_;
  Vector feature_sq_norms_;
  double rho_;
};

std::unique_ptr<LossModel> quadratic_model(Matrix design, const Dataset& targets);
std::unique_ptr<LossModel> logistic_model(const Dataset& data, double rho);

struct MinimizerOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 10'000;
  // Use Newton directions; plain gradient descent with backtracking otherwise.
  bool newton = true;
};

struct MinimizerResult {
  Vector w_star;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

/// Deterministic full-gradient solve with Armijo backtracking. Throws
/// NonConvergenceError (carrying the best iterate) if the budget runs out.
MinimizerResult solve_minimizer(const LossModel& model, const MinimizerOptions& options = {});

/// Gradient-noise statistics at the minimizer.
struct NoiseStats {
  Matrix R_s_star;   // (1/N) sum grad Q(w*) grad Q(w*)^T
  double K = 0.0;    // trace(R_s_star)
  double delta = 0.0;
  double nu = 0.0;            // global constant (2 rho for logistic)
  Matrix hessian;             // grad^2 J(w*)
  double nu_hessian = 0.0;    // lambda_min(hessian)
};

NoiseStats noise_stats(const LossModel& model, const Vector& w_star);

}  // namespace rrsgd
