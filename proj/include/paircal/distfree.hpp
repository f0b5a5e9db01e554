// SPDX-License-Identifier: Apache-2.0
//
// Conservative adjustment of a (possibly miscalibrated) variance estimator
// from a held-out set of paired binary responses.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paircal/error.hpp"
#include "paircal/example.hpp"
#include "paircal/metrics.hpp"

namespace paircal {

struct BinaryPrediction {
  double p_hat = 0.5;  // p̂(Y = 1 | x)
  double v_hat = 0.0;  // V̂(1 | x)
};

/// Paired binary calibration records. Nonempty, labels in {0, 1}.
template <class X>
class CalibrationSet {
 public:
  explicit CalibrationSet(std::vector<PairedExample<X, int>> records) : records_(std::move(records)) {
    require(!records_.empty(), ErrorCode::EmptyInput, "calibration set is empty");
    for (const auto& r : records_)
      require((r.y1 == 0 || r.y1 == 1) && (r.y2 == 0 || r.y2 == 1), ErrorCode::InvalidArgument,
              "calibration labels must be 0 or 1");
  }

  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<PairedExample<X, int>>& records() const noexcept { return records_; }

 private:
  std::vector<PairedExample<X, int>> records_;
};

/// (y1 - p̂)(y2 - p̂) / max(v̂, ε), always within [-1/ε, 1/ε].
double score_example(double p_hat, double v_hat, int y1, int y2, double epsilon);

/// Strategy for a one-sided (1 - α) confidence bound on the mean of bounded scores.
class MeanConfidenceBound {
 public:
  virtual ~MeanConfidenceBound() = default;
  /// Returns (lower, upper) for scores bounded in [lo, hi].
  virtual std::pair<double, double> interval(std::span<const double> scores, double lo, double hi,
                                             double alpha) const = 0;
  virtual std::string name() const = 0;
};

/// Hoeffding bound with all of α spent on the upper side; the lower end is
/// the trivial bound `lo`.
class HoeffdingBound final : public MeanConfidenceBound {
 public:
  std::pair<double, double> interval(std::span<const double> scores, double lo, double hi,
                                     double alpha) const override;
  std::string name() const override { return "hoeffding"; }
};

/// sqrt(2·(-ln α) / (n·ε²)).
double hoeffding_margin(std::size_t n, double epsilon, double alpha);

/// mean(scores) + hoeffding_margin. Scores must lie in [-1/ε, 1/ε].
double hoeffding_upper(std::span<const double> scores, double epsilon, double alpha);

struct BoundReport {
  double gamma_plus = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  double mean_s = 0.0;
  double margin = 0.0;
  std::string method = "hoeffding";
};

void validate_epsilon(double epsilon);
void validate_alpha(double alpha);

/// Core of the adjustment given per-record predictions aligned with `labels`.
BoundReport adjust_scores(std::span<const BinaryPrediction> predictions, std::span<const int> y1,
                          std::span<const int> y2, double epsilon, double alpha,
                          const MeanConfidenceBound& bound = HoeffdingBound{});

/// Batch predictor used by `adjust`: one prediction per input, in order.
template <class X>
using BinaryBatchPredictor = std::function<std::vector<BinaryPrediction>(std::span<const X>)>;

template <class X>
BoundReport adjust(const CalibrationSet<X>& calib, const BinaryBatchPredictor<X>& model, double epsilon,
                   double alpha, const MeanConfidenceBound& bound = HoeffdingBound{}) {
  validate_epsilon(epsilon);
  validate_alpha(alpha);
  std::vector<X> xs;
  std::vector<int> y1, y2;
  xs.reserve(calib.size());
  y1.reserve(calib.size());
  y2.reserve(calib.size());
  for (const auto& r : calib.records()) {
    xs.push_back(r.x);
    y1.push_back(r.y1);
    y2.push_back(r.y2);
  }
  const auto preds = model(xs);
  require(preds.size() == xs.size(), ErrorCode::InvalidArgument, "predictor returned wrong count");
  return adjust_scores(preds, y1, y2, epsilon, alpha, bound);
}

/// p̂ ± sqrt(γ⁺·max(v̂, ε)/β), clamped to [0, 1].
Interval adjusted_interval(double p_hat, double v_hat, const BoundReport& report, double beta);

}  // namespace paircal
