// SPDX-License-Identifier: Apache-2.0
#include "paircal/random.hpp"

#include <cstdlib>
#include <string>

namespace paircal {

Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  SplitMix64 mix(seed ^ 0x6A09E667F3BCC909ULL);
  std::uint64_t h = mix();
  h ^= SplitMix64(stream + 0x243F6A8885A308D3ULL)();
  h = SplitMix64(h)();
  h ^= SplitMix64(index + 0x13198A2E03707344ULL)();
  return Rng(SplitMix64(h)());
}

std::size_t worker_count() noexcept {
  const char* env = std::getenv("PAIRCAL_THREADS");
  if (env == nullptr) return 1;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 1;
  } catch (...) {
    return 1;
  }
}

}  // namespace paircal
