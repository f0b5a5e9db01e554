// SPDX-License-Identifier: Apache-2.0
#include "paircal/distfree.hpp"

#include <algorithm>
#include <cmath>

#include "paircal/linalg.hpp"
#include "paircal/parallel.hpp"

namespace paircal {

void validate_epsilon(double epsilon) {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::InvalidEpsilon, "epsilon must be > 0");
}

void validate_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
}

double score_example(double p_hat, double v_hat, int y1, int y2, double epsilon) {
  validate_epsilon(epsilon);
  require(p_hat >= 0.0 && p_hat <= 1.0, ErrorCode::InvalidProbability, "p_hat outside [0,1]");
  const double v = std::max(v_hat, epsilon);
  return (static_cast<double>(y1) - p_hat) * (static_cast<double>(y2) - p_hat) / v;
}

double hoeffding_margin(std::size_t n, double epsilon, double alpha) {
  validate_epsilon(epsilon);
  validate_alpha(alpha);
  require(n > 0, ErrorCode::EmptyInput, "no scores");
  return std::sqrt(2.0 * (-std::log(alpha)) / (static_cast<double>(n) * epsilon * epsilon));
}

std::pair<double, double> HoeffdingBound::interval(std::span<const double> scores, double lo, double hi,
                                                   double alpha) const {
  require(!scores.empty(), ErrorCode::EmptyInput, "no scores");
  validate_alpha(alpha);
  require(hi > lo, ErrorCode::InvalidArgument, "empty score range");
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  for (double s : scores)
    require(std::isfinite(s) && s >= lo - slack && s <= hi + slack, ErrorCode::ScoreOutOfRange,
            "score outside its declared range");
  const double mean = pairwise_sum(scores) / static_cast<double>(scores.size());
  // Range hi - lo = 2/ε reproduces the sqrt(2(-ln α)/(nε²)) margin.
  const double range = hi - lo;
  const double margin =
      std::sqrt(-std::log(alpha) * range * range / (2.0 * static_cast<double>(scores.size())));
  return {lo, mean + margin};
}

double hoeffding_upper(std::span<const double> scores, double epsilon, double alpha) {
  validate_epsilon(epsilon);
  return HoeffdingBound{}.interval(scores, -1.0 / epsilon, 1.0 / epsilon, alpha).second;
}

BoundReport adjust_scores(std::span<const BinaryPrediction> predictions, std::span<const int> y1,
                          std::span<const int> y2, double epsilon, double alpha,
                          const MeanConfidenceBound& bound) {
  validate_epsilon(epsilon);
  validate_alpha(alpha);
  require(!predictions.empty(), ErrorCode::EmptyInput, "calibration set is empty");
  require(predictions.size() == y1.size() && y1.size() == y2.size(), ErrorCode::InvalidArgument,
          "prediction/label count mismatch");
  std::vector<double> scores(predictions.size());
  for_each_chunk(scores.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i)
      scores[i] = score_example(predictions[i].p_hat, predictions[i].v_hat, y1[i], y2[i], epsilon);
  });
  const auto [lower, upper] = bound.interval(scores, -1.0 / epsilon, 1.0 / epsilon, alpha);
  (void)lower;
  BoundReport r;
  r.epsilon = epsilon;
  r.alpha = alpha;
  r.n = scores.size();
  r.mean_s = pairwise_sum(scores) / static_cast<double>(scores.size());
  r.gamma_plus = upper;
  r.margin = upper - r.mean_s;
  r.method = bound.name();
  require(std::isfinite(r.gamma_plus), ErrorCode::InvalidArgument, "non-finite gamma");
  return r;
}

Interval adjusted_interval(double p_hat, double v_hat, const BoundReport& report, double beta) {
  validate_beta(beta);
  Interval out;
  out.beta = beta;
  out.variance_clamped = v_hat < 0.0;
  const double gamma = std::max(0.0, report.gamma_plus);
  const double half = std::sqrt(gamma * std::max(v_hat, report.epsilon) / beta);
  out.lo = std::clamp(p_hat - half, 0.0, 1.0);
  out.hi = std::clamp(p_hat + half, 0.0, 1.0);
  return out;
}

}  // namespace paircal
