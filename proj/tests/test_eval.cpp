// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <random>

#include "paircal/eval.hpp"
#include "paircal/random.hpp"
#include "support.hpp"

using namespace paircal;
using testing::error_of;

TEST_CASE("squared error estimate") {
  CHECK(std::abs(sq_err_est(1.0, 50, 50)) < 1e-15);  // 1 - 2 + 1
  CHECK(std::abs(sq_err_est(0.5, 25, 50) - (0.25 - 0.5 + 600.0 / 2450.0)) < 1e-15);
  CHECK(std::abs(sq_err_est(0.5, 25, 50) + 0.005102) < 1e-6);
  CHECK(std::abs(sq_err_est(0.5, 1, 2) + 0.25) < 1e-15);  // 0.25 - 0.5 + 0
  const std::vector<int> ann{1, 1, 0, 1, 0, 0, 0};
  // 3 of 7 match: 0.2² - 2·0.2·3/7 + 3·2/(7·6)
  const double expect = 0.04 - 0.4 * 3.0 / 7.0 + 6.0 / 42.0;
  CHECK(std::abs(sq_err_est<int>(1, 0.2, ann) - expect) < 1e-15);
  CHECK(std::abs(sq_err_est(0.1, 0, 50) - 0.01) < 1e-15);
  // Can be negative: 0.01 - 0.02 + 20/2450.
  CHECK(std::abs(sq_err_est(0.1, 5, 50) - (0.01 - 0.02 + 20.0 / 2450.0)) < 1e-15);
  CHECK(sq_err_est(0.1, 5, 50) < 0.0);
  const std::vector<int> one{1};
  CHECK(error_of([&] { sq_err_est<int>(1, 0.5, one); }) == ErrorCode::TooFewAnnotations);
  CHECK(error_of([] { sq_err_est(0.5, 3, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("squared error estimate is unbiased") {
  Rng rng(17);
  const std::size_t k = 50;
  for (int t = 0; t < 20; ++t) {
    const double p = rng.uniform();
    const double p_hat = rng.uniform();
    const double truth = (p_hat - p) * (p_hat - p);
    std::mt19937_64 gen(static_cast<std::uint64_t>(t) + 100);
    std::binomial_distribution<std::size_t> binom(k, p);
    const int reps = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double e = sq_err_est(p_hat, binom(gen), k);
      sum += e;
      sum2 += e * e;
    }
    const double mean = sum / reps;
    const double sd = std::sqrt(std::max(sum2 / reps - mean * mean, 0.0) / reps);
    CHECK(std::abs(mean - truth) <= 3.0 * sd + 1e-12);
  }
}

TEST_CASE("equal-count bins and ECE") {
  std::vector<ValueRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({0.1 * i, 0.1 * i});
  CHECK(ece1(recs, 5).value < 1e-15);

  // Two bins: predicted {0, 0} vs realized {1, 1}, predicted {1, 1} vs {1, 1}.
  const std::vector<ValueRecord> two{{1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}, {0.0, 1.0}};
  const auto r = ece2(two, 2, 3.0);
  CHECK(r.kind == StatisticKind::Ece2);
  CHECK(r.bins[0].count == 2);
  CHECK(r.bins[0].upper == 0.0);
  CHECK(r.bins[1].lower == 1.0);
  CHECK(std::abs(r.value - 3.0 * 0.5) < 1e-15);

  // Uneven split: 5 records in 2 bins gives counts 2 and 3.
  const std::vector<ValueRecord> five{{0.1, 0.0}, {0.2, 0.0}, {0.3, 0.0}, {0.4, 0.0}, {0.5, 0.0}};
  const auto u = ece1(five, 2);
  CHECK(u.bins[0].count == 2);
  CHECK(u.bins[1].count == 3);
  CHECK(std::abs(u.value - (0.4 * 0.15 + 0.6 * 0.4)) < 1e-15);

  CHECK(error_of([&] { ece1(five, 6); }) == ErrorCode::TooFewRecords);
  const std::vector<ValueRecord> bad{{NAN, 0.0}};
  CHECK(error_of([&] { ece1(bad, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("ECE-2 of naive variance on coin mixtures") {
  // Two-coin group: p is 0 or 1, p̂ = 0.5, squared error 0.25 = p̂(1-p̂).
  // Fair-coin group: p = p̂ = 0.5, squared error 0.
  std::vector<ValueRecord> two_coin, fair;
  for (int i = 0; i < 100; ++i) {
    two_coin.push_back({0.25, 0.25});
    fair.push_back({0.25, 0.0});
  }
  CHECK(ece2(two_coin, 10).value == 0.0);
  CHECK(std::abs(ece2(fair, 10).value - 0.25) < 1e-15);
}

TEST_CASE("binning is deterministic under ties") {
  std::vector<ValueRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back({static_cast<double>(i % 7), static_cast<double>(i % 13)});
  const auto a = ece2(recs, 10);
  const auto b = ece2(recs, 10);
  CHECK(a.value == b.value);
  for (std::size_t i = 0; i < a.bins.size(); ++i) CHECK(a.bins[i].mean_realized == b.bins[i].mean_realized);
}

TEST_CASE("KL to empirical frequencies") {
  const ProbVector uniform({0.5, 0.5});
  const std::vector<std::size_t> ones{1, 1, 1};
  CHECK(std::abs(kl_to_empirical(uniform, ones) - std::log(2.0)) < 1e-15);
  const std::vector<std::size_t> mixed{0, 1};
  CHECK(std::abs(kl_to_empirical(uniform, mixed)) < 1e-15);
  const ProbVector sure({1.0, 0.0});
  CHECK(error_of([&] { kl_to_empirical(sure, ones); }) == ErrorCode::ZeroModelProbabilityOnObserved);
  const std::vector<std::size_t> none;
  CHECK(error_of([&] { kl_to_empirical(uniform, none); }) == ErrorCode::EmptyInput);
}

TEST_CASE("confidence versus hallucination") {
  const std::vector<ConfidenceSample> s{{0.05, true}, {0.95, false}, {1.0, false}, {1.7, true}, {-0.2, true},
                                        {INFINITY, true}};
  const auto r = confidence_vs_hallucination(s, 10);
  CHECK(r.total == 5);
  CHECK(r.bins[0].count == 2);
  CHECK(r.bins[0].mean_realized == 1.0);
  CHECK(r.bins[9].count == 3);
  CHECK(std::abs(r.bins[9].mean_realized - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(r.bins[0].lower) < 1e-15);
  CHECK(std::abs(r.bins[9].upper - 1.0) < 1e-15);
}

TEST_CASE("score transforms") {
  CHECK(score_one_minus_c(0.8) == doctest::Approx(-0.2));
  CHECK(score_abs_one_minus_c(1.3) == doctest::Approx(-0.3));
  CHECK(score_one_minus_min_one_c(1.3) == 0.0);
  CHECK(score_one_minus_min_c_inv_c(2.0) == doctest::Approx(-0.5));
  CHECK(score_one_minus_min_c_inv_c(0.5) == doctest::Approx(-0.5));
}

TEST_CASE("cluster scores") {
  const std::vector<std::string> keys{"a", "a", "b", "", "a", "a", "a", "a", "x"};
  const auto s = cluster_scores(keys, 5);
  CHECK(s[0] == 3.0);
  CHECK(s[2] == 1.0);
  CHECK(s[3] == 1.0);  // malformed
  CHECK(s[4] == 3.0);
  CHECK(s[5] == 3.0);
  CHECK(s[8] == 1.0);
  const std::vector<std::string> four(4, "k");
  CHECK(cluster_scores(four, 10)[0] == 4.0);
}

TEST_CASE("ranking curves") {
  std::vector<RankingSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back({"s", {{"good", i < 5 ? 1.0 : 0.0}, {"flat", 0.0}}, i >= 5});
  const std::vector<std::string> names{"good", "flat"};
  const auto curves = ranking_comparison(samples, names, 1);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].hallucination_at(0.5) == 0.0);
  CHECK(curves[0].hallucination_at(1.0) == 0.5);
  CHECK(curves[0].curve.size() == 10);
  const auto again = ranking_comparison(samples, names, 1);
  for (std::size_t i = 0; i < 10; ++i) CHECK(again[1].ranked[i].hallucination == curves[1].ranked[i].hallucination);

  const std::vector<std::string> missing{"absent"};
  CHECK(error_of([&] { ranking_comparison(samples, missing, 1); }) == ErrorCode::MissingScore);
  CHECK(error_of([&] { curves[0].hallucination_at(0.0); }) == ErrorCode::InvalidArgument);
}
