// SPDX-License-Identifier: Apache-2.0
//
// Digits-of-π question answering task. A query asks for digit I after the
// decimal point; answers come from the digit-conditioned statement grammar.
//
// Queries: Q ~ Uniform(0.001, 0.1), I ~ Geometric(Q) on {1, 2, ...}, redrawn
// while I >= 10000.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paircal/example.hpp"
#include "paircal/metrics.hpp"
#include "paircal/random.hpp"

namespace paircal {

inline constexpr std::size_t kPiMaxOffset = 9999;

/// The first 10,000 digits after the decimal point. Verified against the
/// shipped checksum on first use (IoFailure on mismatch).
std::string_view pi_digits();
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t pi_digits_expected_checksum();

/// Digit at 1-based offset (offset 1 is 1, offset 2 is 4, ...).
int pi_digit(std::size_t offset);

std::size_t pi_query_sampler(Rng& rng);

/// Exact P(I = offset) under the query distribution.
double pi_offset_probability(std::size_t offset);

/// Exact probability of `sentence` as an answer about `offset`.
double pi_true_prob(std::size_t offset, const std::string& sentence);
inline bool pi_is_hallucination(std::size_t offset, const std::string& sentence) {
  return pi_true_prob(offset, sentence) == 0.0;
}

/// Seeded log-normal noise on the self-pair probabilities, which makes the
/// model miscalibrated (confidences can exceed 1).
struct PiPerturbation {
  double log_sd = 0.05;
  std::uint64_t seed = 0;
};

/// Pair model that sees the offset only through its bucket: offsets below 64
/// are their own bucket, and above that each octave [2^k, 2^(k+1)) is split
/// into 32 equal buckets. Without a perturbation it is exactly calibrated
/// for that grouping: each bucket is a mixture over digits weighted by the
/// query distribution.
class PiPairModel {
 public:
  explicit PiPairModel(std::optional<PiPerturbation> perturbation = std::nullopt);

  static std::size_t bucket_of(std::size_t offset);
  static std::size_t bucket_count();
  /// First and last offset in a bucket.
  static std::pair<std::size_t, std::size_t> bucket_range(std::size_t bucket);

  const std::array<double, 10>& digit_weights(std::size_t bucket) const { return weights_.at(bucket); }
  bool perturbed() const noexcept { return perturbation_.has_value(); }
  const std::optional<PiPerturbation>& perturbation() const noexcept { return perturbation_; }

  double marginal(std::size_t offset, const std::string& sentence) const;
  double pair_same(std::size_t offset, const std::string& sentence) const;
  CheatScore score(std::size_t offset, const std::string& sentence) const;

  /// Draws from the model's first-response marginal.
  std::string sample(std::size_t offset, Rng& rng) const;

  /// Union of all digit supports, the candidate set for top-1 search.
  static const std::vector<std::string>& candidate_sentences();

 private:
  std::optional<PiPerturbation> perturbation_;
  std::vector<std::array<double, 10>> weights_;
};

/// n queries with two answers each from the true grammar; shared_latent is the digit.
std::vector<PairedExample<std::size_t, std::string>> pi_dataset(std::size_t n, std::uint64_t seed);

}  // namespace paircal
