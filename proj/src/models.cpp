// SPDX-License-Identifier: Apache-2.0
#include "paircal/models.hpp"

#include "paircal/linalg.hpp"

namespace paircal {

double naive_variance(double p_hat) {
  require(p_hat >= 0.0 && p_hat <= 1.0, ErrorCode::InvalidProbability, "p_hat outside [0,1]");
  return p_hat * (1.0 - p_hat);
}

EnsembleEstimate ensemble_predict(std::span<const double> member_predictions) {
  require(member_predictions.size() >= 2, ErrorCode::TooFewMembers, "ensemble needs at least two members");
  const double n = static_cast<double>(member_predictions.size());
  EnsembleEstimate e;
  e.mean = pairwise_sum(member_predictions) / n;
  std::vector<double> sq;
  sq.reserve(member_predictions.size());
  for (double p : member_predictions) sq.push_back((p - e.mean) * (p - e.mean));
  e.variance = pairwise_sum(sq) / (n - 1.0);
  return e;
}

}  // namespace paircal
