// SPDX-License-Identifier: Apache-2.0
#include "paircal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "paircal/linalg.hpp"
#include "paircal/random.hpp"

namespace paircal {

namespace {
constexpr std::uint64_t kTieStream = 0x7135;
}

double sq_err_est(double p_hat, std::size_t matches, std::size_t k) {
  require(k >= 2, ErrorCode::TooFewAnnotations, "need at least two annotations");
  require(matches <= k, ErrorCode::InvalidArgument, "more matches than annotations");
  const double kd = static_cast<double>(k);
  const double m = static_cast<double>(matches);
  return p_hat * p_hat - 2.0 * p_hat * (m / kd) + m * (m - 1.0) / (kd * (kd - 1.0));
}

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Ece1: return "ece1";
    case StatisticKind::Ece2: return "ece2";
    case StatisticKind::ConfidenceVsHallucination: return "confidence_vs_hallucination";
  }
  return "?";
}

BinnedReliability equal_count_bins(std::span<const ValueRecord> records, std::size_t bins, StatisticKind kind,
                                   double class_count) {
  require(bins >= 1, ErrorCode::InvalidArgument, "need at least one bin");
  require(records.size() >= bins, ErrorCode::TooFewRecords,
          std::to_string(records.size()) + " records for " + std::to_string(bins) + " bins");
  for (const auto& r : records)
    require(std::isfinite(r.predicted) && std::isfinite(r.realized), ErrorCode::InvalidArgument,
            "non-finite record");
  const std::size_t n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].predicted < records[b].predicted; });

  BinnedReliability out;
  out.kind = kind;
  out.total = n;
  out.bins.resize(bins);
  std::vector<double> terms(bins);
  std::vector<double> pred, real;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t begin = b * n / bins;
    const std::size_t end = (b + 1) * n / bins;
    pred.clear();
    real.clear();
    for (std::size_t i = begin; i < end; ++i) {
      pred.push_back(records[order[i]].predicted);
      real.push_back(records[order[i]].realized);
    }
    auto& bin = out.bins[b];
    bin.count = end - begin;
    bin.lower = records[order[begin]].predicted;
    bin.upper = records[order[end - 1]].predicted;
    bin.mean_predicted = pairwise_sum(pred) / static_cast<double>(bin.count);
    bin.mean_realized = pairwise_sum(real) / static_cast<double>(bin.count);
    terms[b] = static_cast<double>(bin.count) / static_cast<double>(n) *
               std::abs(bin.mean_predicted - bin.mean_realized);
  }
  out.value = class_count * pairwise_sum(terms);
  return out;
}

BinnedReliability ece1(std::span<const ValueRecord> records, std::size_t bins, double class_count) {
  return equal_count_bins(records, bins, StatisticKind::Ece1, class_count);
}

BinnedReliability ece2(std::span<const ValueRecord> records, std::size_t bins, double class_count) {
  return equal_count_bins(records, bins, StatisticKind::Ece2, class_count);
}

double kl_to_empirical(const ProbVector& p_hat, std::span<const std::size_t> annotations) {
  require(!annotations.empty(), ErrorCode::EmptyInput, "no annotations");
  std::vector<std::size_t> counts(p_hat.size(), 0);
  for (std::size_t a : annotations) {
    require(a < p_hat.size(), ErrorCode::InvalidArgument, "annotation label out of range");
    ++counts[a];
  }
  const double n = static_cast<double>(annotations.size());
  std::vector<double> terms;
  for (std::size_t y = 0; y < counts.size(); ++y) {
    if (counts[y] == 0) continue;
    require(p_hat[y] > 0.0, ErrorCode::ZeroModelProbabilityOnObserved,
            "model gives zero probability to observed label " + std::to_string(y));
    const double f = static_cast<double>(counts[y]) / n;
    terms.push_back(f * (std::log(f) - std::log(p_hat[y])));
  }
  return pairwise_sum(terms);
}

BinnedReliability confidence_vs_hallucination(std::span<const ConfidenceSample> samples, std::size_t bins,
                                              double lo, double hi) {
  require(bins >= 1 && hi > lo, ErrorCode::InvalidArgument, "bad confidence binning");
  BinnedReliability out;
  out.kind = StatisticKind::ConfidenceVsHallucination;
  out.bins.resize(bins);
  std::vector<double> sum_c(bins, 0.0), sum_h(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.bins[b].lower = lo + width * static_cast<double>(b);
    out.bins[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.confidence)) continue;
    const double pos = std::floor((s.confidence - lo) / width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++out.bins[b].count;
    sum_c[b] += s.confidence;
    sum_h[b] += s.hallucination ? 1.0 : 0.0;
    ++out.total;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    auto& bin = out.bins[b];
    if (bin.count == 0) continue;
    bin.mean_predicted = sum_c[b] / static_cast<double>(bin.count);
    bin.mean_realized = sum_h[b] / static_cast<double>(bin.count);
  }
  // Reported value: the worst excess of hallucination rate over 1 − mean confidence.
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& bin : out.bins)
    if (bin.count > 0) worst = std::max(worst, bin.mean_realized - (1.0 - bin.mean_predicted));
  out.value = out.total > 0 ? worst : 0.0;
  return out;
}

double score_one_minus_c(double c) { return -(1.0 - c); }
double score_abs_one_minus_c(double c) { return -std::abs(1.0 - c); }
double score_one_minus_min_one_c(double c) { return -(1.0 - std::min(1.0, c)); }
double score_one_minus_min_c_inv_c(double c) { return -(1.0 - std::min(c, 1.0 / c)); }

std::vector<double> cluster_scores(std::span<const std::string> keys, std::size_t group_size) {
  require(group_size >= 1, ErrorCode::InvalidArgument, "group size must be >= 1");
  std::vector<double> out(keys.size(), 1.0);
  for (std::size_t begin = 0; begin < keys.size(); begin += group_size) {
    const std::size_t end = std::min(keys.size(), begin + group_size);
    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t i = begin; i < end; ++i)
      if (!keys[i].empty()) ++counts[keys[i]];
    for (std::size_t i = begin; i < end; ++i)
      if (!keys[i].empty()) out[i] = static_cast<double>(counts[keys[i]]);
  }
  return out;
}

double RankingCurve::hallucination_at(double response_rate) const {
  require(response_rate > 0.0 && response_rate <= 1.0, ErrorCode::InvalidArgument, "response rate must be in (0,1]");
  if (ranked.empty()) return 0.0;
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(response_rate * static_cast<double>(ranked.size()) - 1e-9)));
  return curve[k - 1].hallucination_rate;
}

std::vector<RankingCurve> ranking_comparison(std::span<const RankingSample> samples,
                                             std::span<const std::string> strategies, std::uint64_t seed) {
  std::vector<RankingCurve> out;
  const std::size_t n = samples.size();
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const auto& name = strategies[s];
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = samples[i].scores.find(name);
      require(it != samples[i].scores.end(), ErrorCode::MissingScore,
              "sample " + std::to_string(i) + " has no '" + name + "' score");
      require(!std::isnan(it->second), ErrorCode::MissingScore, "NaN '" + name + "' score");
      score[i] = it->second;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = substream(seed, kTieStream, s);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

    RankingCurve curve;
    curve.strategy = name;
    curve.ranked.reserve(n);
    curve.curve.reserve(n);
    std::size_t bad = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& sample = samples[order[k]];
      curve.ranked.push_back({score[order[k]], sample.hallucination});
      bad += sample.hallucination ? 1 : 0;
      curve.curve.push_back({static_cast<double>(k + 1) / static_cast<double>(n),
                             static_cast<double>(bad) / static_cast<double>(k + 1)});
    }
    out.push_back(std::move(curve));
  }
  return out;
}

}  // namespace paircal
