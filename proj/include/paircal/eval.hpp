// SPDX-License-Identifier: Apache-2.0
//
// Calibration metrics (ECE-1, ECE-2, KL to empirical annotation frequencies)
// and ranking-strategy comparisons for selective generation.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paircal/core.hpp"
#include "paircal/error.hpp"
#include "paircal/metrics.hpp"

namespace paircal {

/// Unbiased estimate of (p̂ − p)² from K ≥ 2 annotations, `matches` of which equal y.
/// May be negative.
double sq_err_est(double p_hat, std::size_t matches, std::size_t k);

template <class Y>
double sq_err_est(const Y& y, double p_hat, std::span<const Y> annotations) {
  require(annotations.size() >= 2, ErrorCode::TooFewAnnotations, "need at least two annotations");
  std::size_t m = 0;
  for (const auto& a : annotations) m += (a == y) ? 1 : 0;
  return sq_err_est(p_hat, m, annotations.size());
}

enum class StatisticKind { Ece1, Ece2, ConfidenceVsHallucination };
std::string to_string(StatisticKind kind);

struct ReliabilityBin {
  double lower = 0.0;  // smallest predicted value in the bin
  double upper = 0.0;  // largest predicted value in the bin
  std::size_t count = 0;
  double mean_predicted = 0.0;
  double mean_realized = 0.0;
};

struct BinnedReliability {
  StatisticKind kind = StatisticKind::Ece2;
  std::vector<ReliabilityBin> bins;
  std::size_t total = 0;
  double value = 0.0;  // class_count · Σ |bin|/N · |mean predicted − mean realized|
};

/// One prediction with its realized counterpart: (p̂, label frequency) for
/// ECE-1, (V̂, squared-error estimate) for ECE-2.
struct ValueRecord {
  double predicted = 0.0;
  double realized = 0.0;
};

/// Equal-count bins after a stable sort by predicted value. Throws
/// TooFewRecords when there are fewer records than bins.
BinnedReliability equal_count_bins(std::span<const ValueRecord> records, std::size_t bins, StatisticKind kind,
                                   double class_count = 1.0);

BinnedReliability ece1(std::span<const ValueRecord> records, std::size_t bins = 100, double class_count = 1.0);
BinnedReliability ece2(std::span<const ValueRecord> records, std::size_t bins = 100, double class_count = 1.0);

/// KL(empirical ‖ p̂) over annotation labels, 0·ln 0 = 0. Throws
/// ZeroModelProbabilityOnObserved.
double kl_to_empirical(const ProbVector& p_hat, std::span<const std::size_t> annotations);

/// Hallucination rate per equal-width confidence bin over [lo, hi). Scores
/// outside the range go to the end bins; infinite confidences are dropped.
struct ConfidenceSample {
  double confidence = 0.0;
  bool hallucination = false;
};
BinnedReliability confidence_vs_hallucination(std::span<const ConfidenceSample> samples, std::size_t bins,
                                              double lo = 0.0, double hi = 1.0);

namespace strategy {
inline constexpr const char* kTotalLogProb = "total_logprob";
inline constexpr const char* kAvgTokenLogProb = "avg_token_logprob";
inline constexpr const char* kCluster10 = "cluster_10";
inline constexpr const char* kCluster120 = "cluster_120";
inline constexpr const char* kOneMinusC = "one_minus_c";
inline constexpr const char* kAbsOneMinusC = "abs_one_minus_c";
inline constexpr const char* kOneMinusMinOneC = "one_minus_min_1_c";
inline constexpr const char* kOneMinusMinCInv = "one_minus_min_c_inv_c";
}  // namespace strategy

/// Higher is better for every transform (the negated criterion).
double score_one_minus_c(double c);
double score_abs_one_minus_c(double c);
double score_one_minus_min_one_c(double c);
double score_one_minus_min_c_inv_c(double c);

/// Cluster-size scores: consecutive groups of `group_size`, each sample
/// scored by how many samples of its group share its key (itself included).
/// Empty keys mark malformed samples and score 1.
std::vector<double> cluster_scores(std::span<const std::string> keys, std::size_t group_size);

struct RankingSample {
  std::string sentence;
  std::map<std::string, double> scores;
  bool hallucination = false;
};

struct RankedItem {
  double score = 0.0;
  bool hallucination = false;
};

struct CurvePoint {
  double response_rate = 0.0;
  double hallucination_rate = 0.0;
};

struct RankingCurve {
  std::string strategy;
  std::vector<RankedItem> ranked;
  std::vector<CurvePoint> curve;

  /// Hallucination rate of the top ⌈rate·N⌉ items.
  double hallucination_at(double response_rate) const;
};

/// Sorts each strategy descending by score; ties are ordered by a seeded
/// shuffle. Throws MissingScore if a sample lacks a requested strategy.
std::vector<RankingCurve> ranking_comparison(std::span<const RankingSample> samples,
                                             std::span<const std::string> strategies, std::uint64_t seed);

}  // namespace paircal
