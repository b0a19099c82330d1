#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rrsgd/engine.hpp"

namespace rrsgd {

/// Trial-averaged squared deviation. Entry j follows the indexing of the
/// underlying Trajectory (see Trajectory::epoch_of / step_of).
struct MsdCurve {
  std::vector<double> mean_sq_dev;
  std::vector<double> std_error;
  // trials x entries, kept so window averages can take their error from the
  // spread of per-trial averages.
  Matrix per_trial;
  std::size_t trials = 0;
  Granularity granularity = Granularity::epoch_start;
  std::size_t epoch_length = 0;

  std::size_t epochs() const noexcept;
  std::size_t entry_of(std::size_t epoch, std::size_t step) const noexcept;
  std::uint64_t iteration_of(std::size_t j) const noexcept;
};

// Throws ValidationError for an empty or ragged ensemble.
MsdCurve summarize(const Ensemble& ensemble);
MsdCurve summarize(std::span<const Trajectory> trajectories);

/// Trailing block of epochs used for steady-state estimates: `epochs` when
/// set, otherwise max(fraction * total, min_epochs).
struct WindowSpec {
  double fraction = 0.25;
  std::size_t min_epochs = 50;
  std::optional<std::size_t> epochs;

  std::size_t resolve(std::size_t total_epochs) const;
};

struct SteadyState {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t window_epochs = 0;
};

/// Mean of the epoch-start entries w_0^k over the window, k = E-W+1 .. E.
/// The error is the standard error of the per-trial window means.
SteadyState steady_state_msd(const MsdCurve& curve, const WindowSpec& window = {});

struct SlopeFit {
  double slope_db_per_decade = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Least squares of 10 log10(msd) against log10(mu). Needs at least three
/// distinct mu values and strictly positive msd.
SlopeFit slope_fit(std::span<const std::pair<double, double>> points);

struct PeriodicityProfile {
  // profile[i] = steady mean of ||w_i^k - w*||^2 divided by the i = 0 value.
  std::vector<double> profile;
  std::vector<double> raw;
  std::vector<double> std_error;  // of raw, from per-trial window means
  // 1-based position of the maximum; ties resolve to the smallest position.
  std::size_t peak_position = 1;
};

/// Within-epoch shape over the steady window. Needs every-iterate granularity.
PeriodicityProfile periodicity_profile(const MsdCurve& curve, const WindowSpec& window = {});

/// Least-squares slope of log10(msd) against log10(iteration) over the final
/// decade [last/10, last]. Throws ValidationError if the data do not span a
/// decade.
double decay_rate_fit(std::span<const double> iterations, std::span<const double> msd);
double decay_rate_fit(const MsdCurve& curve);

struct EpochBudget {
  std::size_t burn_in = 0;
  std::size_t window = 0;
  std::size_t total = 0;
};

/// Epoch count for a constant-step run: burn-in long enough for
/// (1 - mu lambda_min)^{2N k} to shrink the initial excess
/// initial_sq_dev / target_msd by 5 further e-folds, then the window
/// resolved against the total.
EpochBudget auto_epochs(double mu, double lambda_min, std::size_t n, double initial_sq_dev, double target_msd,
                        const WindowSpec& window = {});

// 10 log10(x).
double to_db(double x);

}  // namespace rrsgd
