#include "rrsgd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <string>
#include <thread>

#include "rrsgd/errors.hpp"
#include "rrsgd/rng.hpp"

namespace rrsgd {

namespace {

// Runs fn(t) for t in [0, count) on up to `workers` threads. Each slot is
// written by exactly one task, so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < count; t = next++) {
      try {
        fn(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double max_lipschitz(const LossModel& model) {
  double delta = 0.0;
  for (std::size_t n = 0; n < model.n_samples(); ++n) delta = std::max(delta, model.sample_lipschitz(n));
  return delta;
}

void check_vector(const LossModel& model, const Vector& v, const char* name) {
  if (static_cast<std::size_t>(v.size()) != model.dim()) {
    std::ostringstream msg;
    msg << name << " has dimension " << v.size() << ", model expects " << model.dim();
    throw ValidationError(msg.str());
  }
}

[[noreturn]] void diverged(std::uint64_t iteration) {
  std::ostringstream msg;
  msg << "iterate norm exceeded " << kDivergenceThreshold << " at iteration " << iteration;
  throw DivergenceError(msg.str(), iteration);
}

}  // namespace

StepSizeRule StepSizeRule::constant(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("step size mu must be finite and >= 0");
  return {Kind::constant, mu, 0.0};
}

StepSizeRule StepSizeRule::decaying(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("decaying step constant c must be > 0");
  return {Kind::decaying, 0.0, c};
}

std::string_view to_string(Granularity g) noexcept {
  return g == Granularity::every_iterate ? "every-iterate" : "epoch-start";
}

Granularity parse_granularity(std::string_view text) {
  if (text == "every-iterate") return Granularity::every_iterate;
  if (text == "epoch-start") return Granularity::epoch_start;
  throw ValidationError("unknown granularity '" + std::string(text) +
                        "' (expected every-iterate or epoch-start)");
}

std::size_t Trajectory::epochs() const noexcept {
  if (sq_dev.empty()) return 0;
  if (granularity == Granularity::epoch_start) return sq_dev.size() - 1;
  return (sq_dev.size() - 1) / epoch_length;
}

std::uint64_t Trajectory::epoch_of(std::size_t j) const noexcept {
  return granularity == Granularity::epoch_start ? j : j / epoch_length;
}

std::size_t Trajectory::step_of(std::size_t j) const noexcept {
  return granularity == Granularity::epoch_start ? 0 : j % epoch_length;
}

std::uint64_t Trajectory::iteration_of(std::size_t j) const noexcept {
  return granularity == Granularity::epoch_start ? static_cast<std::uint64_t>(j) * epoch_length : j;
}

double Trajectory::epoch_start(std::size_t k) const {
  const std::size_t j = granularity == Granularity::epoch_start ? k : k * epoch_length;
  if (j >= sq_dev.size()) throw IndexOutOfRangeError("trajectory has no epoch " + std::to_string(k));
  return sq_dev[j];
}

double theorem1_step_limit(double nu, double delta, std::size_t n) {
  return nu / (3.0 * delta * delta * static_cast<double>(n));
}

Trajectory run_sgd(const LossModel& model, SamplingSchedule schedule, const StepSizeRule& step,
                   const RunOptions& options, const Vector& w_star, const Vector& w0) {
  if (options.epochs < 1) throw ValidationError("run_sgd: epochs must be >= 1");
  if (schedule.epoch_length() != model.n_samples()) {
    throw ValidationError("run_sgd: schedule epoch length differs from sample count");
  }
  check_vector(model, w_star, "w_star");
  check_vector(model, w0, "w0");
  if (options.strict && step.kind == StepSizeRule::Kind::constant) {
    const double limit = theorem1_step_limit(model.strong_convexity(), max_lipschitz(model), model.n_samples());
    if (step.mu > limit) {
      std::ostringstream msg;
      msg << "strict mode: mu = " << step.mu << " exceeds nu/(3 delta^2 N) = " << limit;
      throw StepSizeError(msg.str());
    }
  }

  const std::size_t n = model.n_samples();
  Trajectory traj;
  traj.granularity = options.granularity;
  traj.epoch_length = n;
  traj.seed = schedule.seed();
  traj.sampler = schedule.kind();
  traj.step = step;
  traj.sq_dev.reserve(options.granularity == Granularity::every_iterate ? options.epochs * n + 1
                                                                        : options.epochs + 1);

  Vector w = w0;
  Vector g(w.size());
  traj.sq_dev.push_back((w - w_star).squaredNorm());
  std::uint64_t iteration = 0;
  const double limit_sq = kDivergenceThreshold * kDivergenceThreshold;
  for (std::size_t k = 0; k < options.epochs; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const Draw d = schedule.next();
      model.sample_gradient_into(w, d.index, g);
      w.noalias() -= step.at(iteration) * g;
      ++iteration;
      const double norm_sq = w.squaredNorm();
      if (!(norm_sq <= limit_sq)) diverged(iteration);
      if (options.granularity == Granularity::every_iterate || i + 1 == n) {
        traj.sq_dev.push_back((w - w_star).squaredNorm());
      }
    }
  }
  return traj;
}

CoupledRun run_longterm_model(const LossModel& model, SamplingSchedule schedule, double mu,
                              std::size_t epochs, const Vector& w_star, const Matrix& H,
                              const Vector& w0) {
  if (epochs < 1) throw ValidationError("run_longterm_model: epochs must be >= 1");
  if (schedule.kind() == SamplerKind::uniform) {
    throw UnsupportedKindError("the long-term model is defined for permutation sampling");
  }
  if (schedule.epoch_length() != model.n_samples()) {
    throw ValidationError("run_longterm_model: schedule epoch length differs from sample count");
  }
  check_vector(model, w_star, "w_star");
  check_vector(model, w0, "w0");
  const auto m = static_cast<Eigen::Index>(model.dim());
  if (H.rows() != m || H.cols() != m) throw ValidationError("run_longterm_model: H has the wrong shape");
  if (!(mu >= 0.0)) throw ValidationError("run_longterm_model: mu must be >= 0");

  const std::size_t n = model.n_samples();
  auto make_traj = [&] {
    Trajectory t;
    t.granularity = Granularity::epoch_start;
    t.epoch_length = n;
    t.seed = schedule.seed();
    t.sampler = schedule.kind();
    t.step = StepSizeRule::constant(mu);
    t.sq_dev.reserve(epochs + 1);
    return t;
  };
  CoupledRun out{make_traj(), make_traj(), {}};
  out.gap_sq.reserve(epochs + 1);

  const Matrix transition = Matrix::Identity(m, m) - mu * H;
  Vector w = w0;
  Vector err_prime = w_star - w0;
  Vector g(m), full(m), tmp(m);
  std::vector<Vector> grads(n, Vector(m));

  auto record = [&] {
    out.real.sq_dev.push_back((w - w_star).squaredNorm());
    out.longterm.sq_dev.push_back(err_prime.squaredNorm());
    out.gap_sq.push_back((w_star - err_prime - w).squaredNorm());
  };
  record();

  const double limit_sq = kDivergenceThreshold * kDivergenceThreshold;
  std::uint64_t iteration = 0;
  for (std::size_t k = 0; k < epochs; ++k) {
    // Sample gradients at the epoch-start iterate w_0^k.
    full.setZero();
    for (std::size_t j = 0; j < n; ++j) {
      model.sample_gradient_into(w, j, grads[j]);
      full += grads[j];
    }
    full /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
      const Draw d = schedule.next();
      tmp.noalias() = transition * err_prime;
      err_prime = tmp + mu * (grads[d.index] - full);

      model.sample_gradient_into(w, d.index, g);
      w.noalias() -= mu * g;
      ++iteration;
      if (!(w.squaredNorm() <= limit_sq) || !(err_prime.squaredNorm() <= limit_sq)) diverged(iteration);
    }
    record();
  }
  return out;
}

Ensemble run_trials(const TrialConfig& config, std::size_t trials, std::uint64_t base_seed,
                    unsigned workers) {
  if (config.model == nullptr) throw ValidationError("run_trials: no model");
  if (trials < 1) throw ValidationError("run_trials: need at least one trial");
  const LossModel& model = *config.model;
  Ensemble out;
  out.trajectories.resize(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    SamplingSchedule schedule(config.sampler, model.n_samples(), derive_seed(base_seed, t));
    out.trajectories[t] = run_sgd(model, schedule, config.step, config.run, config.w_star, config.w0);
  });
  return out;
}

std::vector<CoupledRun> run_coupled_trials(const LossModel& model, double mu, std::size_t epochs,
                                           const Vector& w_star, const Matrix& H, const Vector& w0,
                                           std::size_t trials, std::uint64_t base_seed,
                                           unsigned workers) {
  if (trials < 1) throw ValidationError("run_coupled_trials: need at least one trial");
  std::vector<CoupledRun> out(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    SamplingSchedule schedule(SamplerKind::reshuffle, model.n_samples(), derive_seed(base_seed, t));
    out[t] = run_longterm_model(model, schedule, mu, epochs, w_star, H, w0);
  });
  return out;
}

}  // namespace rrsgd
