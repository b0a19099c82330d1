#include "rrsgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rrsgd/errors.hpp"

namespace rrsgd {

namespace {

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return {slope, my - slope * mx, r2};
}

// Mean and standard error over trials of the per-trial average of `columns`.
std::pair<double, double> window_stats(const Matrix& per_trial, const std::vector<Eigen::Index>& columns) {
  const Eigen::Index trials = per_trial.rows();
  Vector means(trials);
  for (Eigen::Index t = 0; t < trials; ++t) {
    double s = 0.0;
    for (Eigen::Index c : columns) s += per_trial(t, c);
    means(t) = s / static_cast<double>(columns.size());
  }
  const double mean = means.mean();
  if (trials < 2) return {mean, 0.0};
  const double var = (means.array() - mean).square().sum() / static_cast<double>(trials - 1);
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

}  // namespace

double to_db(double x) { return 10.0 * std::log10(x); }

std::size_t MsdCurve::epochs() const noexcept {
  if (mean_sq_dev.empty()) return 0;
  if (granularity == Granularity::epoch_start) return mean_sq_dev.size() - 1;
  return (mean_sq_dev.size() - 1) / epoch_length;
}

std::size_t MsdCurve::entry_of(std::size_t epoch, std::size_t step) const noexcept {
  return granularity == Granularity::epoch_start ? epoch : epoch * epoch_length + step;
}

std::uint64_t MsdCurve::iteration_of(std::size_t j) const noexcept {
  return granularity == Granularity::epoch_start ? static_cast<std::uint64_t>(j) * epoch_length : j;
}

MsdCurve summarize(const Ensemble& ensemble) { return summarize(ensemble.trajectories); }

MsdCurve summarize(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw ValidationError("summarize: empty ensemble");
  const Trajectory& first = trajectories.front();
  const std::size_t len = first.sq_dev.size();
  for (const Trajectory& t : trajectories) {
    if (t.sq_dev.size() != len || t.granularity != first.granularity || t.epoch_length != first.epoch_length) {
      throw ValidationError("summarize: trajectories differ in length or granularity");
    }
  }
  MsdCurve curve;
  curve.trials = trajectories.size();
  curve.granularity = first.granularity;
  curve.epoch_length = first.epoch_length;
  curve.per_trial.resize(static_cast<Eigen::Index>(curve.trials), static_cast<Eigen::Index>(len));
  for (std::size_t t = 0; t < curve.trials; ++t) {
    for (std::size_t j = 0; j < len; ++j) {
      curve.per_trial(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = trajectories[t].sq_dev[j];
    }
  }
  curve.mean_sq_dev.resize(len);
  curve.std_error.resize(len);
  const double trials = static_cast<double>(curve.trials);
  for (std::size_t j = 0; j < len; ++j) {
    const auto col = curve.per_trial.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    curve.mean_sq_dev[j] = mean;
    if (curve.trials > 1) {
      const double var = (col.array() - mean).square().sum() / (trials - 1.0);
      curve.std_error[j] = std::sqrt(var / trials);
    } else {
      curve.std_error[j] = 0.0;
    }
  }
  return curve;
}

std::size_t WindowSpec::resolve(std::size_t total_epochs) const {
  if (epochs) return *epochs;
  const auto scaled = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total_epochs)));
  return std::max(scaled, min_epochs);
}

SteadyState steady_state_msd(const MsdCurve& curve, const WindowSpec& window) {
  const std::size_t total = curve.epochs();
  const std::size_t w = window.resolve(total);
  if (w < 1) throw ValidationError("steady_state_msd: window must cover at least one epoch");
  if (w > total) {
    std::ostringstream msg;
    msg << "steady_state_msd: window of " << w << " epochs is longer than the curve (" << total << ")";
    throw ValidationError(msg.str());
  }
  std::vector<Eigen::Index> columns;
  columns.reserve(w);
  for (std::size_t k = total - w + 1; k <= total; ++k) {
    columns.push_back(static_cast<Eigen::Index>(curve.entry_of(k, 0)));
  }
  const auto [mean, se] = window_stats(curve.per_trial, columns);
  return {mean, se, w};
}

SlopeFit slope_fit(std::span<const std::pair<double, double>> points) {
  std::set<double> distinct;
  for (const auto& [mu, msd] : points) {
    if (!(mu > 0.0)) throw ValidationError("slope_fit: step sizes must be positive");
    if (!(msd > 0.0)) throw ValidationError("slope_fit: msd values must be positive");
    distinct.insert(mu);
  }
  if (distinct.size() < 3) throw ValidationError("slope_fit: need at least 3 distinct step sizes");
  std::vector<double> x, y;
  for (const auto& [mu, msd] : points) {
    x.push_back(std::log10(mu));
    y.push_back(to_db(msd));
  }
  const LineFit fit = least_squares(x, y);
  SlopeFit out;
  out.slope_db_per_decade = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.points.assign(points.begin(), points.end());
  return out;
}

PeriodicityProfile periodicity_profile(const MsdCurve& curve, const WindowSpec& window) {
  if (curve.granularity != Granularity::every_iterate) {
    throw ValidationError("periodicity_profile: needs every-iterate granularity");
  }
  const std::size_t n = curve.epoch_length;
  const std::size_t total = curve.epochs();
  const std::size_t w = window.resolve(total);
  if (w < 1 || w > total) throw ValidationError("periodicity_profile: window longer than the curve");

  PeriodicityProfile out;
  out.raw.resize(n);
  out.std_error.resize(n);
  out.profile.resize(n);
  // Epochs E-W .. E-1 are the last W complete epochs.
  std::vector<Eigen::Index> columns(w);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < w; ++r) {
      columns[r] = static_cast<Eigen::Index>(curve.entry_of(total - w + r, i));
    }
    const auto [mean, se] = window_stats(curve.per_trial, columns);
    out.raw[i] = mean;
    out.std_error[i] = se;
  }
  const double base = out.raw[0];
  if (!(base > 0.0)) throw ValidationError("periodicity_profile: epoch-start msd is zero");
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.profile[i] = out.raw[i] / base;
    if (out.raw[i] > out.raw[peak]) peak = i;
  }
  out.peak_position = peak + 1;
  return out;
}

double decay_rate_fit(std::span<const double> iterations, std::span<const double> msd) {
  if (iterations.size() != msd.size()) throw ValidationError("decay_rate_fit: size mismatch");
  if (iterations.empty()) throw ValidationError("decay_rate_fit: no data");
  const double last = *std::max_element(iterations.begin(), iterations.end());
  const double start = last / 10.0;
  double first_positive = last;
  for (double it : iterations)
    if (it > 0.0) first_positive = std::min(first_positive, it);
  if (!(last > 0.0) || first_positive > start) {
    throw ValidationError("decay_rate_fit: data span less than one decade of iterations");
  }
  std::vector<double> x, y;
  for (std::size_t j = 0; j < iterations.size(); ++j) {
    if (iterations[j] < start) continue;
    if (!(msd[j] > 0.0)) throw ValidationError("decay_rate_fit: msd values must be positive");
    x.push_back(std::log10(iterations[j]));
    y.push_back(std::log10(msd[j]));
  }
  if (x.size() < 2) throw ValidationError("decay_rate_fit: too few points in the final decade");
  return least_squares(x, y).slope;
}

double decay_rate_fit(const MsdCurve& curve) {
  std::vector<double> its(curve.mean_sq_dev.size());
  for (std::size_t j = 0; j < its.size(); ++j) its[j] = static_cast<double>(curve.iteration_of(j));
  return decay_rate_fit(its, curve.mean_sq_dev);
}

EpochBudget auto_epochs(double mu, double lambda_min, std::size_t n, double initial_sq_dev, double target_msd,
                        const WindowSpec& window) {
  if (!(mu > 0.0) || !(lambda_min > 0.0) || !(mu * lambda_min < 1.0) || n < 1) {
    throw ValidationError("auto_epochs: need 0 < mu lambda_min < 1 and N >= 1");
  }
  const double rate = -2.0 * static_cast<double>(n) * std::log1p(-mu * lambda_min);
  double efolds = 5.0;
  if (initial_sq_dev > 0.0 && target_msd > 0.0 && initial_sq_dev > target_msd) {
    efolds += std::log(initial_sq_dev / target_msd);
  }
  EpochBudget b;
  b.burn_in = static_cast<std::size_t>(std::ceil(efolds / rate));
  if (window.epochs) {
    b.window = *window.epochs;
    b.total = b.burn_in + b.window;
    return b;
  }
  // Smallest total with total - resolve(total) >= burn_in.
  std::size_t total = b.burn_in + window.min_epochs;
  if (window.fraction < 1.0) {
    const auto scaled = static_cast<std::size_t>(std::ceil(static_cast<double>(b.burn_in) / (1.0 - window.fraction)));
    total = std::max(total, scaled);
  }
  while (total < b.burn_in + window.resolve(total)) ++total;
  b.total = total;
  b.window = window.resolve(total);
  return b;
}

}  // namespace rrsgd
