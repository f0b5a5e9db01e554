// SPDX-License-Identifier: Apache-2.0
//
// Cheat-corrected decoders: selective filtering, rejection sampling and
// top-1 search. A decoder sees an input only through a DecodableModel
// bound to it.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "paircal/error.hpp"
#include "paircal/metrics.hpp"
#include "paircal/random.hpp"

namespace paircal {

enum class DecodeKind { SelectiveFilter, RejectionSampling, Top1Search };
enum class ThresholdMode { OneSided, Absolute };  // 1 − C ≤ β  |  |1 − C| ≤ β
enum class Decision { Accepted, Abstain, Exhausted };

std::string to_string(DecodeKind kind);
std::string to_string(ThresholdMode mode);
std::string to_string(Decision decision);
DecodeKind decode_kind_from_string(const std::string& name);
ThresholdMode threshold_mode_from_string(const std::string& name);

struct DecodePolicy {
  DecodeKind kind = DecodeKind::RejectionSampling;
  double beta = 0.05;
  ThresholdMode mode = ThresholdMode::Absolute;
  std::size_t max_attempts = 1000;       // rejection sampling
  std::size_t candidate_budget = 6400;   // top-1 search over samples

  void validate() const;
  bool passes(double confidence) const;
};

/// A model with the input already bound: draws from p̂(Y1 | x), scores a
/// response, and names it (labels order top-1 ties and key caches).
template <class Y>
struct DecodableModel {
  std::function<Y(Rng&)> sample;
  std::function<CheatScore(const Y&)> score;
  std::function<std::string(const Y&)> label;
};

template <class Y>
struct Response {
  Decision decision = Decision::Abstain;
  std::optional<Y> y;        // set when accepted
  CheatScore score;          // of the accepted or the last rejected response
  std::size_t attempts = 0;  // draws made (rejection sampling and filtering)
};

/// Wraps `model.score` with a cache keyed by label.
template <class Y>
DecodableModel<Y> memoize_scores(DecodableModel<Y> model) {
  auto cache = std::make_shared<std::unordered_map<std::string, CheatScore>>();
  auto inner = model.score;
  auto label = model.label;
  model.score = [cache, inner, label](const Y& y) {
    auto key = label(y);
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    auto s = inner(y);
    cache->emplace(std::move(key), s);
    return s;
  };
  return model;
}

template <class Y>
Response<Y> selective_filter(const DecodableModel<Y>& model, const DecodePolicy& policy, Rng& rng) {
  policy.validate();
  Response<Y> r;
  Y y = model.sample(rng);
  r.score = model.score(y);
  r.attempts = 1;
  if (policy.passes(r.score.confidence)) {
    r.decision = Decision::Accepted;
    r.y = std::move(y);
  }
  return r;
}

template <class Y>
Response<Y> rejection_sample(const DecodableModel<Y>& model, const DecodePolicy& policy, Rng& rng) {
  policy.validate();
  Response<Y> r;
  r.decision = Decision::Exhausted;
  for (std::size_t t = 1; t <= policy.max_attempts; ++t) {
    Y y = model.sample(rng);
    r.score = model.score(y);
    r.attempts = t;
    if (policy.passes(r.score.confidence)) {
      r.decision = Decision::Accepted;
      r.y = std::move(y);
      return r;
    }
  }
  return r;
}

/// Highest-marginal candidate passing the threshold; ties go to the smaller
/// label. Abstains when nothing passes.
template <class Y>
Response<Y> top1_search(const DecodableModel<Y>& model, const DecodePolicy& policy, std::span<const Y> candidates) {
  policy.validate();
  Response<Y> r;
  std::optional<std::size_t> best;
  std::string best_label;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto s = model.score(candidates[i]);
    if (!policy.passes(s.confidence)) continue;
    auto lab = model.label(candidates[i]);
    if (!best || s.p_marginal > r.score.p_marginal ||
        (s.p_marginal == r.score.p_marginal && lab < best_label)) {
      best = i;
      best_label = std::move(lab);
      r.score = s;
    }
  }
  if (best) {
    r.decision = Decision::Accepted;
    r.y = candidates[*best];
  }
  return r;
}

/// Distinct responses among `budget` draws, in label order.
template <class Y>
std::vector<Y> sample_candidates(const DecodableModel<Y>& model, std::size_t budget, Rng& rng) {
  std::map<std::string, Y> seen;
  for (std::size_t i = 0; i < budget; ++i) {
    Y y = model.sample(rng);
    seen.try_emplace(model.label(y), std::move(y));
  }
  std::vector<Y> out;
  out.reserve(seen.size());
  for (auto& [k, y] : seen) out.push_back(std::move(y));
  return out;
}

/// Top-1 search over `policy.candidate_budget` samples.
template <class Y>
Response<Y> top1_search(const DecodableModel<Y>& model, const DecodePolicy& policy, Rng& rng) {
  policy.validate();
  const auto candidates = sample_candidates(model, policy.candidate_budget, rng);
  return top1_search(model, policy, std::span<const Y>(candidates));
}

/// Dispatches on policy.kind; top-1 search draws its own candidates.
template <class Y>
Response<Y> decode(const DecodableModel<Y>& model, const DecodePolicy& policy, Rng& rng) {
  switch (policy.kind) {
    case DecodeKind::SelectiveFilter: return selective_filter(model, policy, rng);
    case DecodeKind::RejectionSampling: return rejection_sample(model, policy, rng);
    case DecodeKind::Top1Search: return top1_search(model, policy, rng);
  }
  fail(ErrorCode::InvalidArgument, "unknown decode kind");
}

}  // namespace paircal
