#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rrsgd/linalg.hpp"
#include "rrsgd/model.hpp"
#include "rrsgd/sampling.hpp"

namespace rrsgd {

/// Constant step mu, or mu(i) = c / (i + 1) indexed by the global iteration
/// counter i = 0, 1, 2, ...
struct StepSizeRule {
  enum class Kind { constant, decaying };

  Kind kind = Kind::constant;
  double mu = 0.0;
  double c = 0.0;

  static StepSizeRule constant(double mu);
  static StepSizeRule decaying(double c);

  double at(std::uint64_t iteration) const noexcept {
    return kind == Kind::constant ? mu : c / static_cast<double>(iteration + 1);
  }
};

enum class Granularity { every_iterate, epoch_start };

std::string_view to_string(Granularity g) noexcept;
Granularity parse_granularity(std::string_view text);

/// Squared deviations ||w - w*||^2 of one run.
///
/// Epoch-start granularity stores E + 1 values (w_0^0 ... w_0^E). Every-iterate
/// granularity stores E*N + 1 values: entry k*N + i is w_i^k, and the final
/// entry is w_0^E.
struct Trajectory {
  std::vector<double> sq_dev;
  Granularity granularity = Granularity::epoch_start;
  std::size_t epoch_length = 0;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::reshuffle;
  StepSizeRule step;

  std::size_t epochs() const noexcept;
  // Epoch and in-epoch step of entry j.
  std::uint64_t epoch_of(std::size_t j) const noexcept;
  std::size_t step_of(std::size_t j) const noexcept;
  // Global iteration count of entry j (number of gradient steps taken).
  std::uint64_t iteration_of(std::size_t j) const noexcept;
  // ||w_0^k - w*||^2 regardless of granularity.
  double epoch_start(std::size_t k) const;
};

struct RunOptions {
  std::size_t epochs = 1;
  Granularity granularity = Granularity::epoch_start;
  // Reject constant steps above nu / (3 delta^2 N).
  bool strict = false;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Plain SGD driven by `schedule`: w_i = w_{i-1} - mu(t) grad Q(w_{i-1}; x_{sigma(i)}).
/// The schedule is taken by value and advanced from its current cursor.
/// Throws DivergenceError when ||w|| exceeds kDivergenceThreshold.
Trajectory run_sgd(const LossModel& model, SamplingSchedule schedule, const StepSizeRule& step,
                   const RunOptions& options, const Vector& w_star, const Vector& w0);

/// A real reshuffling run and the long-term model driven by the same
/// permutations. The long-term state evolves as
///   e'_{i} = (I - mu H) e'_{i-1} + mu s_{sigma(i)}(w_0^k)
/// with errors e = w* - w and noise frozen at the real epoch-start iterate.
/// Both start from w0. Every sequence has E + 1 epoch-start entries.
struct CoupledRun {
  Trajectory real;
  Trajectory longterm;
  std::vector<double> gap_sq;  // ||w'_0^k - w_0^k||^2
};

CoupledRun run_longterm_model(const LossModel& model, SamplingSchedule schedule, double mu,
                              std::size_t epochs, const Vector& w_star, const Matrix& H,
                              const Vector& w0);

/// Everything a batch of independent trials shares.
struct TrialConfig {
  const LossModel* model = nullptr;
  SamplerKind sampler = SamplerKind::reshuffle;
  StepSizeRule step;
  RunOptions run;
  Vector w_star;
  Vector w0;
};

struct Ensemble {
  std::vector<Trajectory> trajectories;

  std::size_t trials() const noexcept { return trajectories.size(); }
};

/// Runs T trials; trial t uses seed derive_seed(base_seed, t). The result does
/// not depend on `workers` (0 = hardware concurrency). The error of the
/// lowest-numbered failing trial is rethrown.
Ensemble run_trials(const TrialConfig& config, std::size_t trials, std::uint64_t base_seed,
                    unsigned workers = 0);

/// Coupled (real, long-term) trials with the same seeding contract.
std::vector<CoupledRun> run_coupled_trials(const LossModel& model, double mu, std::size_t epochs,
                                           const Vector& w_star, const Matrix& H, const Vector& w0,
                                           std::size_t trials, std::uint64_t base_seed,
                                           unsigned workers = 0);

// Largest constant step allowed by the starting-point stability theorem.
double theorem1_step_limit(double nu, double delta, std::size_t n);

}  // namespace rrsgd
