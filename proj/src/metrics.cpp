// SPDX-License-Identifier: Apache-2.0
#include "paircal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "paircal/linalg.hpp"

namespace paircal {

void validate_beta(double beta) {
  require(beta > 0.0 && beta < 1.0, ErrorCode::InvalidBeta, "beta must lie in (0,1)");
}

CheatScore cheat_score_from_conditional(std::string y, double p_marginal, double p_self_cheat) {
  require(p_marginal >= 0.0 && p_marginal <= 1.0 + tol::kNormalization, ErrorCode::InvalidProbability,
          "p_marginal outside [0,1]");
  require(p_self_cheat >= 0.0 && p_self_cheat <= 1.0 + tol::kNormalization,
          ErrorCode::InvalidProbability, "p_self_cheat outside [0,1]");
  CheatScore s;
  s.y = std::move(y);
  s.p_marginal = std::min(p_marginal, 1.0);
  s.p_self_cheat = p_marginal > 0.0 ? std::min(p_self_cheat, 1.0) : 0.0;
  s.v_cheat = s.p_marginal * (s.p_self_cheat - s.p_marginal);
  if (s.p_marginal == 0.0) {
    s.confidence = 0.0;
  } else if (s.p_self_cheat == 0.0) {
    s.confidence = std::numeric_limits<double>::infinity();
    s.degenerate = true;
  } else {
    s.confidence = s.p_marginal / s.p_self_cheat;
  }
  return s;
}

CheatScore cheat_score_from_pair(std::string y, double p_marginal, double p_pair_same) {
  const double cond = p_marginal > 0.0 ? std::max(0.0, p_pair_same) / p_marginal : 0.0;
  return cheat_score_from_conditional(std::move(y), p_marginal, cond);
}

CheatScore cheat_score(const JointPairDistribution& j, std::size_t y) {
  require(y < j.size(), ErrorCode::InvalidArgument, "response index out of range");
  const double p = std::max(0.0, j.matrix().row(static_cast<Eigen::Index>(y)).sum());
  return cheat_score_from_pair(j.labels()[y], p, j(y, y));
}

CheatScore cheat_score(const JointPairDistribution& j, const std::string& label) {
  return cheat_score(j, j.index_of(label));
}

Interval chebyshev_interval(const CheatScore& score, double beta) {
  validate_beta(beta);
  Interval out;
  out.beta = beta;
  out.variance_clamped = score.v_cheat < 0.0;
  const double half = std::sqrt(std::max(0.0, score.v_cheat) / beta);
  out.lo = std::clamp(score.p_marginal - half, 0.0, 1.0);
  out.hi = std::clamp(score.p_marginal + half, 0.0, 1.0);
  return out;
}

double cantelli_lower_bound(const CheatScore& score, double beta) {
  validate_beta(beta);
  const double v = std::max(0.0, score.v_cheat);
  return std::clamp(score.p_marginal - std::sqrt(v * (1.0 / beta - 1.0)), 0.0, 1.0);
}

HallucinationBound hallucination_bound_report(std::span<const CheatScore> scores) {
  require(!scores.empty(), ErrorCode::EmptyInput, "no scores");
  HallucinationBound out;
  std::vector<double> kept;
  kept.reserve(scores.size());
  for (const auto& s : scores) {
    if (!s.confidence_is_finite()) {
      ++out.infinite_confidence;
      continue;
    }
    if (s.confidence > 1.0) ++out.above_one;
    kept.push_back(std::clamp(s.confidence, 0.0, 1.0));
  }
  require(!kept.empty(), ErrorCode::EmptyInput, "every score has infinite confidence");
  out.used = kept.size();
  out.bound = 1.0 - pairwise_sum(kept) / static_cast<double>(kept.size());
  return out;
}

double hallucination_bound(std::span<const CheatScore> scores) {
  return hallucination_bound_report(scores).bound;
}

}  // namespace paircal
