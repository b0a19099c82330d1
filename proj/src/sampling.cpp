#include "rrsgd/sampling.hpp"

#include <numeric>
#include <sstream>
#include <string>

#include "rrsgd/errors.hpp"
#include "rrsgd/rng.hpp"

namespace rrsgd {

std::string_view to_string(SamplerKind kind) noexcept {
  switch (kind) {
    case SamplerKind::uniform:
      return "uniform";
    case SamplerKind::reshuffle:
      return "reshuffle";
    case SamplerKind::cyclic:
      return "cyclic";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "uniform") return SamplerKind::uniform;
  if (text == "reshuffle") return SamplerKind::reshuffle;
  if (text == "cyclic") return SamplerKind::cyclic;
  throw ValidationError("unknown sampler '" + std::string(text) +
                        "' (expected uniform, reshuffle or cyclic)");
}

SamplingSchedule::SamplingSchedule(SamplerKind kind, std::size_t epoch_length, std::uint64_t seed)
    : kind_(kind), n_(epoch_length), seed_(seed) {
  if (n_ < 1) throw ValidationError("sampling schedule needs epoch length >= 1");
}

std::vector<std::size_t> SamplingSchedule::epoch_indices(std::uint64_t k) const {
  std::vector<std::size_t> out(n_);
  switch (kind_) {
    case SamplerKind::cyclic:
      std::iota(out.begin(), out.end(), std::size_t{0});
      break;
    case SamplerKind::reshuffle: {
      std::iota(out.begin(), out.end(), std::size_t{0});
      CounterRng rng(seed_, k);
      // Fisher-Yates, high index down.
      for (std::size_t i = n_; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(out[i - 1], out[j]);
      }
      break;
    }
    case SamplerKind::uniform: {
      CounterRng rng(seed_, k);
      for (auto& idx : out) idx = static_cast<std::size_t>(rng.below(n_));
      break;
    }
  }
  return out;
}

std::vector<std::size_t> SamplingSchedule::epoch_permutation(std::uint64_t k) const {
  if (kind_ == SamplerKind::uniform) {
    throw UnsupportedKindError("epoch_permutation is undefined for uniform sampling");
  }
  return epoch_indices(k);
}

Draw SamplingSchedule::next() {
  if (step_ == 0) current_ = epoch_indices(epoch_);
  const Draw d{current_[step_], epoch_, step_};
  if (++step_ == n_) {
    step_ = 0;
    ++epoch_;
  }
  return d;
}

std::vector<double> conditional_distribution(SamplerKind kind, std::span<const std::size_t> prefix,
                                             std::size_t n) {
  if (n < 1) throw ValidationError("conditional_distribution: N must be >= 1");
  if (prefix.size() >= n) {
    throw ValidationError("conditional_distribution: prefix must be shorter than N");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t idx : prefix) {
    if (idx >= n) {
      std::ostringstream msg;
      msg << "conditional_distribution: prefix entry " << idx << " out of range";
      throw ValidationError(msg.str());
    }
    if (seen[idx] && kind != SamplerKind::uniform) {
      throw ValidationError("conditional_distribution: prefix entries must be distinct");
    }
    seen[idx] = true;
  }

  std::vector<double> p(n, 0.0);
  switch (kind) {
    case SamplerKind::uniform:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
      break;
    case SamplerKind::reshuffle: {
      const double mass = 1.0 / static_cast<double>(n - prefix.size());
      for (std::size_t j = 0; j < n; ++j) p[j] = seen[j] ? 0.0 : mass;
      break;
    }
    case SamplerKind::cyclic:
      for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (prefix[i] != i) throw ValidationError("conditional_distribution: not a cyclic prefix");
      }
      p[prefix.size()] = 1.0;
      break;
  }
  return p;
}

}  // namespace rrsgd
