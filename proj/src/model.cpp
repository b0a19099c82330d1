#include "rrsgd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rrsgd/errors.hpp"
#include "rrsgd/rng.hpp"

namespace rrsgd {

namespace {

// ln(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + e^t).
double logistic_tail(double t) {
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(DatasetKind kind, Matrix rows, Vector labels)
    : kind_(kind), rows_(std::move(rows)), labels_(std::move(labels)) {}

Dataset Dataset::labeled(Matrix features, Vector labels) {
  if (features.rows() < 2) throw ValidationError("dataset needs at least 2 samples");
  if (features.cols() < 1) throw ValidationError("dataset needs at least 1 feature");
  if (labels.size() != features.rows()) throw ValidationError("label count does not match sample count");
  if (!all_finite(features)) throw ValidationError("dataset features must be finite");
  for (Eigen::Index n = 0; n < labels.size(); ++n) {
    if (labels(n) != 1.0 && labels(n) != -1.0) {
      std::ostringstream msg;
      msg << "label " << n << " is " << labels(n) << "; labels must be exactly -1 or +1";
      throw ValidationError(msg.str());
    }
  }
  return Dataset(DatasetKind::labeled, std::move(features), std::move(labels));
}

Dataset Dataset::with_targets(Matrix targets) {
  if (targets.rows() < 2) throw ValidationError("dataset needs at least 2 samples");
  if (targets.cols() < 1) throw ValidationError("targets need at least 1 component");
  if (!all_finite(targets)) throw ValidationError("dataset targets must be finite");
  return Dataset(DatasetKind::targets, std::move(targets), Vector());
}

double Dataset::positive_fraction() const {
  if (kind_ != DatasetKind::labeled) return 0.0;
  return (labels_.array() > 0.0).cast<double>().mean();
}

Dataset synth_logistic_dataset(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2) throw ValidationError("synth_logistic_dataset: N must be >= 2");
  if (m < 1) throw ValidationError("synth_logistic_dataset: M must be >= 1");
  const auto N = static_cast<Eigen::Index>(n);
  const auto M = static_cast<Eigen::Index>(m);

  CounterRng scale_rng(seed, streams::kScales);
  Vector scales(M);
  for (Eigen::Index j = 0; j < M; ++j) scales(j) = scale_rng.uniform(1.0, 10.0);

  CounterRng truth_rng(seed, streams::kTruth);
  Vector truth(M);
  for (Eigen::Index j = 0; j < M; ++j) truth(j) = truth_rng.normal();

  CounterRng feature_rng(seed, streams::kFeatures);
  CounterRng label_rng(seed, streams::kLabels);
  Matrix features(N, M);
  Vector labels(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) features(i, j) = std::sqrt(scales(j)) * feature_rng.normal();
    const double u = label_rng.uniform();
    const double p = 1.0 / (1.0 + std::exp(-features.row(i).dot(truth)));
    labels(i) = u <= p ? 1.0 : -1.0;
  }
  return Dataset::labeled(std::move(features), std::move(labels));
}

Dataset synth_targets_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n < 2) throw ValidationError("synth_targets_dataset: N must be >= 2");
  if (p < 1) throw ValidationError("synth_targets_dataset: dimension must be >= 1");
  CounterRng rng(seed, streams::kTargets);
  Matrix targets(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < targets.rows(); ++i)
    for (Eigen::Index j = 0; j < targets.cols(); ++j) targets(i, j) = rng.normal();
  return Dataset::with_targets(std::move(targets));
}

Matrix random_orthonormal(std::size_t p, std::size_t m, std::uint64_t seed) {
  if (m < 1 || p < m) throw ValidationError("random_orthonormal: need p >= m >= 1");
  CounterRng rng(seed, streams::kDesign);
  Matrix g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  return q;
}

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::quadratic ? "quadratic" : "logistic";
}

// -------------------------------------------------------------- LossModel

void LossModel::check_index(std::size_t n) const {
  if (n >= n_samples()) {
    std::ostringstream msg;
    msg << "sample index " << n << " out of range [0, " << n_samples() << ")";
    throw IndexOutOfRangeError(msg.str());
  }
}

void LossModel::check_point(const Vector& w) const {
  if (static_cast<std::size_t>(w.size()) != dim()) {
    std::ostringstream msg;
    msg << "point has dimension " << w.size() << ", model expects " << dim();
    throw ValidationError(msg.str());
  }
}

Vector LossModel::sample_gradient(const Vector& w, std::size_t n) const {
  check_point(w);
  check_index(n);
  Vector out(static_cast<Eigen::Index>(dim()));
  sample_gradient_into(w, n, out);
  return out;
}

double LossModel::risk(const Vector& w) const {
  check_point(w);
  double total = 0.0;
  for (std::size_t n = 0; n < n_samples(); ++n) total += sample_loss(w, n);
  return total / static_cast<double>(n_samples());
}

Vector LossModel::full_gradient(const Vector& w) const {
  check_point(w);
  Vector total = Vector::Zero(static_cast<Eigen::Index>(dim()));
  Vector g(total.size());
  for (std::size_t n = 0; n < n_samples(); ++n) {
    sample_gradient_into(w, n, g);
    total += g;
  }
  return total / static_cast<double>(n_samples());
}

Matrix LossModel::hessian(const Vector& w) const {
  check_point(w);
  const auto m = static_cast<Eigen::Index>(dim());
  Matrix total = Matrix::Zero(m, m);
  for (std::size_t n = 0; n < n_samples(); ++n) total += sample_hessian(w, n);
  return total / static_cast<double>(n_samples());
}

Vector LossModel::gradient_noise(const Vector& w, std::size_t n) const {
  return sample_gradient(w, n) - full_gradient(w);
}

// --------------------------------------------------------- QuadraticModel

QuadraticModel::QuadraticModel(Matrix design, const Dataset& targets)
    : design_(std::move(design)), targets_(targets.rows()) {
  if (targets.kind() != DatasetKind::targets) {
    throw InvalidModelError("quadratic model needs a targets dataset");
  }
  if (design_.rows() != targets_.cols()) {
    std::ostringstream msg;
    msg << "design has " << design_.rows() << " rows but targets have dimension " << targets_.cols();
    throw InvalidModelError(msg.str());
  }
  if (design_.cols() < 1 || design_.cols() > design_.rows()) {
    throw InvalidModelError("design matrix cannot have full column rank");
  }
  if (!design_.allFinite()) throw InvalidModelError("design matrix must be finite");
  gram_ = design_.transpose() * design_;
  const EigenFactorization eig = jacobi_eigen(gram_);
  lambda_min_ = eig.lambda(0);
  lambda_max_ = eig.lambda(eig.lambda.size() - 1);
  if (!(lambda_min_ > 1e-12 * std::max(1.0, lambda_max_))) {
    throw InvalidModelError("design matrix is rank deficient (A^T A is singular)");
  }
  projected_ = targets_ * design_;
}

double QuadraticModel::sample_loss(const Vector& w, std::size_t n) const {
  const auto row = static_cast<Eigen::Index>(n);
  return 0.5 * (design_ * w - targets_.row(row).transpose()).squaredNorm();
}

void QuadraticModel::sample_gradient_into(const Vector& w, std::size_t n, Vector& out) const {
  out.noalias() = gram_ * w;
  out -= projected_.row(static_cast<Eigen::Index>(n)).transpose();
}

Matrix QuadraticModel::sample_hessian(const Vector& w, std::size_t n) const {
  check_point(w);
  check_index(n);
  return gram_;
}

double QuadraticModel::sample_lipschitz(std::size_t n) const {
  check_index(n);
  return lambda_max_;
}

Vector QuadraticModel::closed_form_minimizer() const {
  const Vector x_bar = targets_.colwise().mean().transpose();
  return gram_.ldlt().solve(design_.transpose() * x_bar);
}

Matrix QuadraticModel::target_covariance() const {
  const Matrix centered = targets_.rowwise() - targets_.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(targets_.rows());
}

// ---------------------------------------------------------- LogisticModel

LogisticModel::LogisticModel(const Dataset& data, double rho)
    : features_(data.rows()), labels_(data.labels()), rho_(rho) {
  if (data.kind() != DatasetKind::labeled) {
    throw InvalidModelError("logistic model needs a labeled dataset");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw StrongConvexityError("logistic model needs rho > 0 for strong convexity");
  }
  feature_sq_norms_ = features_.rowwise().squaredNorm();
}

double LogisticModel::sample_loss(const Vector& w, std::size_t n) const {
  const auto row = static_cast<Eigen::Index>(n);
  const double margin = labels_(row) * features_.row(row).dot(w);
  return rho_ * w.squaredNorm() + softplus(-margin);
}

void LogisticModel::sample_gradient_into(const Vector& w, std::size_t n, Vector& out) const {
  const auto row = static_cast<Eigen::Index>(n);
  const double label = labels_(row);
  const double margin = label * features_.row(row).dot(w);
  const double weight = label * logistic_tail(margin);
  out = 2.0 * rho_ * w;
  out.noalias() -= weight * features_.row(row).transpose();
}

Matrix LogisticModel::sample_hessian(const Vector& w, std::size_t n) const {
  check_point(w);
  check_index(n);
  const auto row = static_cast<Eigen::Index>(n);
  const double margin = labels_(row) * features_.row(row).dot(w);
  const double p = logistic_tail(-margin);
  const double curvature = p * (1.0 - p);
  const auto m = static_cast<Eigen::Index>(dim());
  Matrix h = 2.0 * rho_ * Matrix::Identity(m, m);
  h.noalias() += curvature * features_.row(row).transpose() * features_.row(row);
  return h;
}

double LogisticModel::sample_lipschitz(std::size_t n) const {
  check_index(n);
  return 2.0 * rho_ + 0.25 * feature_sq_norms_(static_cast<Eigen::Index>(n));
}

std::unique_ptr<LossModel> quadratic_model(Matrix design, const Dataset& targets) {
  return std::make_unique<QuadraticModel>(std::move(design), targets);
}

std::unique_ptr<LossModel> logistic_model(const Dataset& data, double rho) {
  return std::make_unique<LogisticModel>(data, rho);
}

// -------------------------------------------------------------- minimizer

MinimizerResult solve_minimizer(const LossModel& model, const MinimizerOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("solve_minimizer: tol must be positive");

  double lipschitz = 0.0;
  for (std::size_t n = 0; n < model.n_samples(); ++n) {
    lipschitz = std::max(lipschitz, model.sample_lipschitz(n));
  }

  Vector w = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
  Vector g = model.full_gradient(w);
  double value = model.risk(w);
  Vector best = w;
  double best_norm = g.norm();

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const double norm = g.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best = w;
    }
    if (norm <= options.tol) return {w, norm, it};

    Vector direction = -g;
    double step = 1.0 / lipschitz;
    if (options.newton) {
      Eigen::LDLT<Matrix> ldlt(model.hessian(w));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vector newton_dir = -ldlt.solve(g);
        if (newton_dir.allFinite() && newton_dir.dot(g) < 0.0) {
          direction = std::move(newton_dir);
          step = 1.0;
        }
      }
    }

    const double slope = g.dot(direction);
    const double initial_step = step;
    bool accepted = false;
    Vector trial;
    // Risk differences below this are rounding; judge those steps by the
    // gradient norm instead, or tiny lucky steps get accepted and stall.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value));
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      trial = w + step * direction;
      const double trial_value = model.risk(trial);
      const bool in_noise = std::abs(trial_value - value) <= noise;
      if (in_noise ? model.full_gradient(trial).norm() < norm : trial_value <= value + 1e-4 * step * slope) {
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Near the optimum the risk decrease drowns in rounding; fall back to
      // the gradient norm as the progress measure.
      trial = w + initial_step * direction;
      if (model.full_gradient(trial).norm() >= norm) {
        throw NonConvergenceError("solve_minimizer: line search stalled", best, best_norm);
      }
      value = model.risk(trial);
    }
    w = std::move(trial);
    g = model.full_gradient(w);
  }

  const double norm = g.norm();
  if (norm <= options.tol) return {w, norm, options.max_iterations};
  if (norm < best_norm) {
    best_norm = norm;
    best = w;
  }
  std::ostringstream msg;
  msg << "solve_minimizer: gradient norm " << best_norm << " above tolerance " << options.tol
      << " after " << options.max_iterations << " iterations";
  throw NonConvergenceError(msg.str(), best, best_norm);
}

NoiseStats noise_stats(const LossModel& model, const Vector& w_star) {
  const auto m = static_cast<Eigen::Index>(model.dim());
  if (w_star.size() != m) throw ValidationError("noise_stats: w_star has the wrong dimension");
  NoiseStats out;
  out.R_s_star = Matrix::Zero(m, m);
  Vector g(m);
  double delta = 0.0;
  for (std::size_t n = 0; n < model.n_samples(); ++n) {
    model.sample_gradient_into(w_star, n, g);
    out.R_s_star.noalias() += g * g.transpose();
    delta = std::max(delta, model.sample_lipschitz(n));
  }
  out.R_s_star /= static_cast<double>(model.n_samples());
  out.K = out.R_s_star.trace();
  out.delta = delta;
  out.nu = model.strong_convexity();
  out.hessian = model.hessian(w_star);
  out.nu_hessian = jacobi_eigen(out.hessian).lambda(0);
  return out;
}

}  // namespace rrsgd
