// SPDX-License-Identifier: Apache-2.0
#include "paircal/pi.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <unordered_map>

#include "paircal/parallel.hpp"
#include "paircal/pcfg.hpp"
#include "pi_digits_data.hpp"

namespace paircal {

namespace {

constexpr std::uint64_t kPiQueryStream = 0x9171;
constexpr std::uint64_t kPiAnswerStream = 0x9172;
constexpr std::uint64_t kPiNoiseStream = 0x9173;
constexpr std::size_t kExactBuckets = 63;  // offsets 1..63
constexpr std::size_t kBucketsPerOctave = 32;

struct DigitTables {
  std::array<std::unordered_map<std::string, double>, 10> prob;
  std::array<std::vector<const SentenceInfo*>, 10> support;
  std::vector<std::string> candidates;

  DigitTables() {
    std::unordered_map<std::string, bool> seen;
    for (int d = 0; d < 10; ++d) {
      const auto& s = pcfg_enumerate_support(d);
      for (const auto& info : s) {
        prob[static_cast<std::size_t>(d)][info.text] = info.prob;
        support[static_cast<std::size_t>(d)].push_back(&info);
        if (seen.emplace(info.text, true).second) candidates.push_back(info.text);
      }
    }
  }
};

const DigitTables& tables() {
  static const DigitTables t;
  return t;
}

double digit_prob(int d, const std::string& sentence) {
  const auto& m = tables().prob[static_cast<std::size_t>(d)];
  const auto it = m.find(sentence);
  return it == m.end() ? 0.0 : it->second;
}

std::string sample_answer(int d, Rng& rng) {
  const auto& s = tables().support[static_cast<std::size_t>(d)];
  double u = rng.uniform();
  for (const auto* info : s) {
    if (u < info->prob) return info->text;
    u -= info->prob;
  }
  return s.back()->text;
}

// ∫ q (1-q)^(i-1) dq over [0.001, 0.1], via t = 1 - q.
double offset_weight(std::size_t i) {
  const double n = static_cast<double>(i);
  auto antiderivative = [n](double t) {
    return std::exp(n * std::log(t)) / n - std::exp((n + 1.0) * std::log(t)) / (n + 1.0);
  };
  return antiderivative(0.999) - antiderivative(0.9);
}

const std::vector<double>& offset_probabilities() {
  static const std::vector<double> probs = [] {
    std::vector<double> w(kPiMaxOffset + 1, 0.0);
    for (std::size_t i = 1; i <= kPiMaxOffset; ++i) w[i] = offset_weight(i);
    const double z = pairwise_sum(std::span<const double>(w).subspan(1));
    for (auto& v : w) v /= z;
    return w;
  }();
  return probs;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t pi_digits_expected_checksum() { return detail::kPiDigitsChecksum; }

std::string_view pi_digits() {
  static const std::string_view digits = [] {
    const std::string_view d(detail::kPiDigits);
    require(d.size() == 10000 && fnv1a64(d) == detail::kPiDigitsChecksum, ErrorCode::IoFailure,
            "embedded pi digits failed their checksum");
    return d;
  }();
  return digits;
}

int pi_digit(std::size_t offset) {
  require(offset >= 1 && offset <= pi_digits().size(), ErrorCode::InvalidArgument, "digit offset out of range");
  return pi_digits()[offset - 1] - '0';
}

std::size_t pi_query_sampler(Rng& rng) {
  for (;;) {
    const double q = std::uniform_real_distribution<double>(0.001, 0.1)(rng);
    const std::size_t i = 1 + static_cast<std::size_t>(std::geometric_distribution<std::int64_t>(q)(rng));
    if (i <= kPiMaxOffset) return i;
  }
}

double pi_offset_probability(std::size_t offset) {
  if (offset < 1 || offset > kPiMaxOffset) return 0.0;
  return offset_probabilities()[offset];
}

double pi_true_prob(std::size_t offset, const std::string& sentence) {
  return digit_prob(pi_digit(offset), sentence);
}

std::size_t PiPairModel::bucket_of(std::size_t offset) {
  require(offset >= 1 && offset <= kPiMaxOffset, ErrorCode::InvalidArgument, "digit offset out of range");
  if (offset <= kExactBuckets) return offset - 1;
  const int octave = std::bit_width(offset) - 1;  // >= 6
  const int shift = octave - 5;
  const std::size_t within = (offset - (std::size_t{1} << octave)) >> shift;
  return kExactBuckets + static_cast<std::size_t>(octave - 6) * kBucketsPerOctave + within;
}

std::size_t PiPairModel::bucket_count() { return bucket_of(kPiMaxOffset) + 1; }

std::pair<std::size_t, std::size_t> PiPairModel::bucket_range(std::size_t bucket) {
  require(bucket < bucket_count(), ErrorCode::InvalidArgument, "bucket out of range");
  if (bucket < kExactBuckets) return {bucket + 1, bucket + 1};
  const std::size_t rel = bucket - kExactBuckets;
  const int octave = 6 + static_cast<int>(rel / kBucketsPerOctave);
  const int shift = octave - 5;
  const std::size_t first = (std::size_t{1} << octave) + ((rel % kBucketsPerOctave) << shift);
  const std::size_t last = std::min(kPiMaxOffset, first + (std::size_t{1} << shift) - 1);
  return {first, last};
}

PiPairModel::PiPairModel(std::optional<PiPerturbation> perturbation) : perturbation_(perturbation) {
  if (perturbation_)
    require(perturbation_->log_sd >= 0.0, ErrorCode::ConfigInvalid, "perturbation sd must be >= 0");
  weights_.assign(bucket_count(), {});
  for (std::size_t b = 0; b < weights_.size(); ++b) {
    const auto [first, last] = bucket_range(b);
    double total = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      weights_[b][static_cast<std::size_t>(pi_digit(i))] += pi_offset_probability(i);
      total += pi_offset_probability(i);
    }
    require(total > 0.0, ErrorCode::EmptyGroup, "empty offset bucket");
    for (auto& w : weights_[b]) w /= total;
  }
}

double PiPairModel::marginal(std::size_t offset, const std::string& sentence) const {
  const auto& w = weights_[bucket_of(offset)];
  double s = 0.0;
  for (int d = 0; d < 10; ++d)
    if (w[static_cast<std::size_t>(d)] > 0.0) s += w[static_cast<std::size_t>(d)] * digit_prob(d, sentence);
  return s;
}

double PiPairModel::pair_same(std::size_t offset, const std::string& sentence) const {
  const std::size_t b = bucket_of(offset);
  const auto& w = weights_[b];
  double s = 0.0;
  for (int d = 0; d < 10; ++d) {
    const double q = digit_prob(d, sentence);
    s += w[static_cast<std::size_t>(d)] * q * q;
  }
  if (perturbation_ && s > 0.0) {
    Rng rng = substream(perturbation_->seed, kPiNoiseStream ^ (static_cast<std::uint64_t>(b) << 32), fnv1a64(sentence));
    const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
    s = std::min(s * std::exp(perturbation_->log_sd * z), marginal(offset, sentence));
  }
  return s;
}

CheatScore PiPairModel::score(std::size_t offset, const std::string& sentence) const {
  return cheat_score_from_pair(sentence, marginal(offset, sentence), pair_same(offset, sentence));
}

std::string PiPairModel::sample(std::size_t offset, Rng& rng) const {
  const auto& w = weights_[bucket_of(offset)];
  double u = rng.uniform();
  int digit = 9;
  for (int d = 0; d < 10; ++d) {
    if (u < w[static_cast<std::size_t>(d)]) {
      digit = d;
      break;
    }
    u -= w[static_cast<std::size_t>(d)];
  }
  while (w[static_cast<std::size_t>(digit)] == 0.0) --digit;  // rounding fallthrough
  return sample_answer(digit, rng);
}

const std::vector<std::string>& PiPairModel::candidate_sentences() { return tables().candidates; }

std::vector<PairedExample<std::size_t, std::string>> pi_dataset(std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  std::vector<PairedExample<std::size_t, std::string>> out(n);
  for_each_chunk(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng q = substream(seed, kPiQueryStream, i);
      Rng a = substream(seed, kPiAnswerStream, i);
      const std::size_t offset = pi_query_sampler(q);
      const int d = pi_digit(offset);
      out[i] = {offset, sample_answer(d, a), sample_answer(d, a), d};
    }
  });
  return out;
}

}  // namespace paircal
