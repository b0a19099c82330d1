#pragma once

#include <array>
#include <cstdint>

namespace rrsgd {

// Philox4x32-10 block function (Salmon et al., Random123). Pure function of
// (counter, key); identical output on every platform.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// Seedable random stream on top of Philox. A stream is addressed by
/// `(seed, stream_id)`; two streams with different ids never overlap, which
/// lets an epoch or a trial be regenerated without replaying anything else.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;
  std::uint32_t next_u32() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform on (0, 1]; safe as a log argument.
  double uniform_open_low() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller. Consumes two uniforms per pair of values.
  double normal() noexcept;
  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Child seed for trial `index` of a run seeded with `base`. SplitMix64
// finalizer over the pair; stable across releases.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

// Well-known stream ids for the data generator.
namespace streams {
inline constexpr std::uint64_t kScales = 0x5CA1E;
inline constexpr std::uint64_t kFeatures = 0xFEA7;
inline constexpr std::uint64_t kTruth = 0x7207;
inline constexpr std::uint64_t kLabels = 0x1AB3;
inline constexpr std::uint64_t kTargets = 0x7A26;
inline constexpr std::uint64_t kDesign = 0xDE51;
}  // namespace streams

}  // namespace rrsgd
