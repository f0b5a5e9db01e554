// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace paircal {

/// SplitMix64 bit generator. Small state, so one stream per example is cheap,
/// which is what lets parallel generation match sequential generation.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

using Rng = SplitMix64;

/// Independent stream `index` of namespace `stream` under `seed`.
Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept;

/// Number of workers allowed by PAIRCAL_THREADS (default 1).
std::size_t worker_count() noexcept;

}  // namespace paircal
