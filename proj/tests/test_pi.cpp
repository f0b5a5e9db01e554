// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "paircal/eval.hpp"
#include "paircal/pcfg.hpp"
#include "paircal/pi.hpp"
#include "support.hpp"

using namespace paircal;

namespace {

// P(I = i) for Q ~ U(0.001, 0.1), I | Q ~ Geometric(Q) on {1, 2, ...},
// truncated to I < 10000; composite Simpson in q, normalized numerically.
std::vector<double> offset_probabilities_by_quadrature() {
  const int m = 20000;  // even
  const double a = 0.001, b = 0.1, h = (b - a) / m;
  std::vector<double> p(10000, 0.0);
  for (int k = 0; k <= m; ++k) {
    const double q = a + h * k;
    const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    double term = q;  // (1 - q)^{i-1} q
    for (int i = 1; i < 10000; ++i) {
      p[static_cast<std::size_t>(i)] += w * term;
      term *= 1.0 - q;
    }
  }
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return p;
}

}  // namespace

TEST_CASE("embedded digits agree with a spigot computation") {
  const std::string ref = oracle::pi_spigot(10000);
  REQUIRE(ref.size() == 10001);
  CHECK(ref.substr(0, 8) == "31415926");
  const auto digits = pi_digits();
  REQUIRE(digits.size() == 10000);
  CHECK(digits == std::string_view(ref).substr(1));
  CHECK(fnv1a64(digits) == pi_digits_expected_checksum());

  const int first[6] = {1, 4, 1, 5, 9, 2};
  for (std::size_t i = 1; i <= 6; ++i) CHECK(pi_digit(i) == first[i - 1]);
  CHECK(testing::error_of([] { pi_digit(0); }).has_value());
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("query distribution") {
  const auto ref = offset_probabilities_by_quadrature();
  double total = 0.0;
  for (std::size_t i = 1; i <= kPiMaxOffset; ++i) {
    total += pi_offset_probability(i);
    REQUIRE(std::abs(pi_offset_probability(i) - ref[i]) <= 1e-9 + 1e-6 * ref[i]);
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(pi_offset_probability(0) == 0.0);
  CHECK(pi_offset_probability(10000) == 0.0);

  Rng rng(7);
  const int n = 1000000;
  std::size_t early = 0, late = 0, lo = 10000, hi = 0;
  std::vector<double> hist(11, 0.0);
  for (int t = 0; t < n; ++t) {
    const std::size_t i = pi_query_sampler(rng);
    lo = std::min(lo, i);
    hi = std::max(hi, i);
    early += i <= 10;
    late += i > 1000 && i <= 1010;
    if (i <= 10) hist[i] += 1.0;
  }
  CHECK(lo >= 1);
  CHECK(hi <= 9999);
  CHECK(early > late);
  for (std::size_t i = 1; i <= 10; ++i)
    CHECK(std::abs(hist[i] / n - ref[i]) <= 4.0 * oracle::sigma(ref[i], n));
}

TEST_CASE("offset buckets partition the offsets") {
  std::size_t next = 1;
  for (std::size_t b = 0; b < PiPairModel::bucket_count(); ++b) {
    const auto [first, last] = PiPairModel::bucket_range(b);
    CHECK(first == next);
    CHECK(last >= first);
    CHECK(PiPairModel::bucket_of(first) == b);
    CHECK(PiPairModel::bucket_of(last) == b);
    next = last + 1;
  }
  CHECK(next == kPiMaxOffset + 1);
  // Offsets below 64 are exact; each octave [2^k, 2^(k+1)) from k = 6 splits
  // into 32 equal buckets, and the last octave stops at 9999 after 8 of them.
  for (std::size_t i = 1; i < 64; ++i) CHECK(PiPairModel::bucket_range(PiPairModel::bucket_of(i)).second == i);
  CHECK(PiPairModel::bucket_range(PiPairModel::bucket_of(64)) == std::pair<std::size_t, std::size_t>{64, 65});
  CHECK(PiPairModel::bucket_range(PiPairModel::bucket_of(9999)).first == 8192 + 7 * 256);
  CHECK(PiPairModel::bucket_count() == 63 + 7 * 32 + 8);
}

TEST_CASE("unperturbed model is the exact bucket mixture") {
  const PiPairModel model;
  for (std::size_t offset : {1u, 3u, 64u, 65u, 700u, 4097u, 9999u}) {
    const auto [first, last] = PiPairModel::bucket_range(PiPairModel::bucket_of(offset));
    // Enumerate member offsets directly.
    double mass = 0.0;
    std::map<std::string, double> m1, m2;
    for (std::size_t i = first; i <= last; ++i) {
      const double w = pi_offset_probability(i);
      mass += w;
      for (const auto& s : pcfg_enumerate_support(pi_digit(i))) {
        m1[s.text] += w * s.prob;
        m2[s.text] += w * s.prob * s.prob;
      }
    }
    for (const auto& [text, v] : m1) {
      const auto sc = model.score(offset, text);
      CHECK(std::abs(sc.p_marginal - v / mass) <= 1e-12);
      CHECK(std::abs(sc.v_cheat - (m2[text] / mass - (v / mass) * (v / mass))) <= 1e-12);
      CHECK(sc.confidence <= 1.0 + 1e-12);
      CHECK(sc.confidence >= 0.0);
    }
  }
  // Known digit: singleton bucket, every well-formed answer has C = 1.
  for (const auto& s : pcfg_enumerate_support(1)) CHECK(std::abs(model.score(1, s.text).confidence - 1.0) < 1e-12);
  CHECK(model.score(1, "It's 4").p_marginal == 0.0);
}

TEST_CASE("perturbed model can report confidence above 1") {
  const PiPairModel noisy(PiPerturbation{0.3, 4});
  std::size_t above = 0;
  for (const auto& s : PiPairModel::candidate_sentences()) above += noisy.score(5000, s).confidence > 1.0 + 1e-9;
  CHECK(above > 0);
  const PiPairModel same(PiPerturbation{0.3, 4});
  CHECK(noisy.score(5000, "It's 7").confidence == same.score(5000, "It's 7").confidence);
}

TEST_CASE("hallucination rate per confidence bin stays under 1 - lower edge") {
  const PiPairModel model;
  Rng rng(31);
  const std::size_t n = 200000;
  std::vector<ConfidenceSample> samples;
  samples.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t offset = pi_query_sampler(rng);
    const auto y = model.sample(offset, rng);
    CHECK(model.marginal(offset, y) > 0.0);
    samples.push_back({model.score(offset, y).confidence, pi_is_hallucination(offset, y)});
  }
  const auto rel = confidence_vs_hallucination(samples, 10);
  for (std::size_t b = 0; b < rel.bins.size(); ++b) {
    const auto& bin = rel.bins[b];
    if (bin.count == 0) continue;
    const double edge = static_cast<double>(b) / 10.0;
    CHECK(bin.mean_realized <= (1.0 - edge) + 3.0 * oracle::sigma(1.0 - edge, static_cast<double>(bin.count)) + 1e-12);
  }
}

TEST_CASE("dataset answers come from the true digit") {
  const auto d = pi_dataset(5000, 2);
  for (const auto& e : d) {
    REQUIRE(e.shared_latent.has_value());
    CHECK(*e.shared_latent == pi_digit(e.x));
    CHECK(pi_true_prob(e.x, e.y1) > 0.0);
    CHECK(pi_true_prob(e.x, e.y2) > 0.0);
  }
  const auto again = pi_dataset(100, 2);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].y1 == d[i].y1);
}
