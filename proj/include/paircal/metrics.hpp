// SPDX-License-Identifier: Apache-2.0
//
// Cheat-corrected epistemic variance and confidence, and the population-level
// intervals and hallucination bounds that follow from them.
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "paircal/core.hpp"

namespace paircal {

struct CheatScore {
  std::string y;
  double p_marginal = 0.0;    // p̂(Y1 = y | x)
  double p_self_cheat = 0.0;  // p̂(Y2 = y | Y1 = y, x)
  double v_cheat = 0.0;       // raw value, may be negative for miscalibrated models
  double confidence = 0.0;    // may exceed 1 for miscalibrated models; +inf when degenerate
  bool degenerate = false;    // p_self_cheat == 0 < p_marginal

  bool confidence_is_finite() const noexcept {
    return confidence != std::numeric_limits<double>::infinity();
  }
};

/// Builds a score from the first-response marginal and the conditional
/// probability of repeating `y` given it was already observed.
CheatScore cheat_score_from_conditional(std::string y, double p_marginal, double p_self_cheat);

/// Same contract, with the pair probability p̂(Y1 = y, Y2 = y) instead of the conditional.
CheatScore cheat_score_from_pair(std::string y, double p_marginal, double p_pair_same);

CheatScore cheat_score(const JointPairDistribution& j, std::size_t y);
CheatScore cheat_score(const JointPairDistribution& j, const std::string& label);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double beta = 0.0;
  bool variance_clamped = false;  // a negative variance estimate was replaced by 0

  bool contains(double p) const noexcept { return lo <= p && p <= hi; }
  double width() const noexcept { return hi - lo; }
};

/// p̂ ± sqrt(max(v, 0) / β), clamped to [0, 1].
Interval chebyshev_interval(const CheatScore& score, double beta);

/// p̂ - sqrt(max(v, 0)·(1/β - 1)), clamped to [0, 1].
double cantelli_lower_bound(const CheatScore& score, double beta);

struct HallucinationBound {
  double bound = 0.0;              // 1 - mean(clamped confidence)
  std::size_t used = 0;            // scores averaged
  std::size_t infinite_confidence = 0;  // degenerate scores left out of the average
  std::size_t above_one = 0;       // confidences clamped down to 1
};

/// Upper bound on the statistical hallucination rate of responses with these
/// scores. Confidences are clamped to [0, 1]; infinite ones are excluded.
HallucinationBound hallucination_bound_report(std::span<const CheatScore> scores);
double hallucination_bound(std::span<const CheatScore> scores);

void validate_beta(double beta);

}  // namespace paircal
