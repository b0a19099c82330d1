#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rrsgd {

enum class SamplerKind { uniform, reshuffle, cyclic };

std::string_view to_string(SamplerKind kind) noexcept;
// Accepts "uniform", "reshuffle", "cyclic"; throws ValidationError otherwise.
SamplerKind parse_sampler_kind(std::string_view text);

// One sample selection. `index` is a 0-based sample index; `epoch` counts
// from 0 and `step` is the 0-based position inside the epoch, so the draw
// produces iterate w_{step+1} of epoch `epoch`.
struct Draw {
  std::size_t index;
  std::uint64_t epoch;
  std::size_t step;
};

/// Index stream for one SGD run. Every epoch's indices are a pure function of
/// (seed, epoch), so any epoch can be regenerated without replaying earlier
/// ones. A schedule value is single-writer; copy it (or use with_seed) to run
/// trials in parallel.
class SamplingSchedule {
 public:
  SamplingSchedule(SamplerKind kind, std::size_t epoch_length, std::uint64_t seed);

  SamplerKind kind() const noexcept { return kind_; }
  std::size_t epoch_length() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }

  Draw next();

  // The full order of epoch k (0-based sample indices). Defined for all
  // kinds: a permutation for reshuffle/cyclic, an i.i.d. sequence for uniform.
  std::vector<std::size_t> epoch_indices(std::uint64_t k) const;

  // Permutation sigma^k. Throws UnsupportedKindError for uniform sampling.
  std::vector<std::size_t> epoch_permutation(std::uint64_t k) const;

  SamplingSchedule with_seed(std::uint64_t seed) const { return {kind_, n_, seed}; }

 private:
  SamplerKind kind_;
  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::size_t step_ = 0;
  std::vector<std::size_t> current_;
};

/// Law of the next index given the indices already drawn in this epoch.
/// Reshuffle: 1/(N - i) off the prefix, 0 on it. Uniform: 1/N regardless.
/// Cyclic: point mass on the next index in order (the prefix must be
/// 0, 1, ..., i-1). Throws ValidationError for duplicate or out-of-range
/// prefix entries, or a prefix of length >= N.
std::vector<double> conditional_distribution(SamplerKind kind, std::span<const std::size_t> prefix,
                                             std::size_t n);

}  // namespace rrsgd
