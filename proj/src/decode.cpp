// SPDX-License-Identifier: Apache-2.0
#include "paircal/decode.hpp"

#include <cmath>

namespace paircal {

std::string to_string(DecodeKind kind) {
  switch (kind) {
    case DecodeKind::SelectiveFilter: return "selective_filter";
    case DecodeKind::RejectionSampling: return "rejection_sampling";
    case DecodeKind::Top1Search: return "top1_search";
  }
  return "?";
}

std::string to_string(ThresholdMode mode) { return mode == ThresholdMode::OneSided ? "one_sided" : "absolute"; }

std::string to_string(Decision decision) {
  switch (decision) {
    case Decision::Accepted: return "accepted";
    case Decision::Abstain: return "abstain";
    case Decision::Exhausted: return "exhausted";
  }
  return "?";
}

DecodeKind decode_kind_from_string(const std::string& name) {
  for (auto k : {DecodeKind::SelectiveFilter, DecodeKind::RejectionSampling, DecodeKind::Top1Search})
    if (to_string(k) == name) return k;
  fail(ErrorCode::ConfigInvalid, "unknown decoder '" + name + "'");
}

ThresholdMode threshold_mode_from_string(const std::string& name) {
  for (auto m : {ThresholdMode::OneSided, ThresholdMode::Absolute})
    if (to_string(m) == name) return m;
  fail(ErrorCode::ConfigInvalid, "unknown threshold mode '" + name + "'");
}

void DecodePolicy::validate() const {
  validate_beta(beta);
  require(max_attempts >= 1, ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  require(candidate_budget >= 1, ErrorCode::InvalidArgument, "candidate_budget must be >= 1");
}

bool DecodePolicy::passes(double confidence) const {
  if (std::isnan(confidence)) return false;
  if (mode == ThresholdMode::OneSided) return 1.0 - confidence <= beta;
  return std::abs(1.0 - confidence) <= beta;
}

}  // namespace paircal
