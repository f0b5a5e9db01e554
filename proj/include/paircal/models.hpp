// SPDX-License-Identifier: Apache-2.0
//
// Closed-form pair predictors: tables of joints indexed by an explicit
// grouping of inputs, and finite mixtures over component likelihoods for
// response spaces too large to tabulate.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paircal/core.hpp"
#include "paircal/distfree.hpp"
#include "paircal/example.hpp"
#include "paircal/metrics.hpp"
#include "paircal/random.hpp"

namespace paircal {

template <class X>
using Grouping = std::function<std::size_t(const X&)>;

template <class X>
struct WeightedPoint {
  X x{};
  double weight = 1.0;
};

template <class X>
class TabularPairModel {
 public:
  TabularPairModel(Grouping<X> grouping, std::vector<JointPairDistribution> table)
      : grouping_(std::move(grouping)), table_(std::move(table)) {
    require(!table_.empty(), ErrorCode::EmptyInput, "empty table");
  }

  std::size_t num_groups() const noexcept { return table_.size(); }
  std::size_t group_of(const X& x) const {
    const std::size_t g = grouping_(x);
    require(g < table_.size(), ErrorCode::InvalidArgument, "grouping returned an unknown group");
    return g;
  }
  const JointPairDistribution& group_joint(std::size_t g) const { return table_.at(g); }
  const JointPairDistribution& joint(const X& x) const { return table_[group_of(x)]; }
  const std::vector<JointPairDistribution>& table() const noexcept { return table_; }
  const Grouping<X>& grouping() const noexcept { return grouping_; }

  CheatScore score(const X& x, std::size_t y) const { return cheat_score(joint(x), y); }

  /// p̂(1|x) and V̂_cheat(1|x) for binary tables.
  BinaryPrediction binary(const X& x) const {
    const auto s = score(x, 1);
    return {s.p_marginal, s.v_cheat};
  }

 private:
  Grouping<X> grouping_;
  std::vector<JointPairDistribution> table_;
};

/// Each group's joint is the weighted average of p(·|x)p(·|x)ᵀ over its
/// members, so the table is calibrated for the grouping by construction.
template <class X>
TabularPairModel<X> tabular_from_oracle(const std::function<ProbVector(const X&)>& oracle,
                                        std::span<const WeightedPoint<X>> members, Grouping<X> grouping,
                                        std::size_t num_groups) {
  require(num_groups > 0, ErrorCode::InvalidArgument, "need at least one group");
  std::vector<Eigen::MatrixXd> acc(num_groups);
  std::vector<double> mass(num_groups, 0.0);
  for (const auto& m : members) {
    require(m.weight >= 0.0 && std::isfinite(m.weight), ErrorCode::InvalidArgument, "bad member weight");
    const std::size_t g = grouping(m.x);
    require(g < num_groups, ErrorCode::InvalidArgument, "grouping returned an unknown group");
    const Eigen::VectorXd p = oracle(m.x).to_eigen();
    if (acc[g].size() == 0) acc[g] = Eigen::MatrixXd::Zero(p.size(), p.size());
    require(acc[g].rows() == p.size(), ErrorCode::InvalidArgument, "oracle changed its alphabet size");
    acc[g].noalias() += m.weight * (p * p.transpose());
    mass[g] += m.weight;
  }
  std::vector<JointPairDistribution> table;
  table.reserve(num_groups);
  for (std::size_t g = 0; g < num_groups; ++g) {
    require(mass[g] > 0.0, ErrorCode::EmptyGroup, "group " + std::to_string(g) + " has no members");
    table.emplace_back(acc[g] / mass[g]);
  }
  return TabularPairModel<X>(std::move(grouping), std::move(table));
}

/// Symmetrized empirical pair frequencies per group, plus additive smoothing.
template <class X>
TabularPairModel<X> tabular_from_counts(std::span<const PairedExample<X, int>> data, Grouping<X> grouping,
                                        std::size_t num_groups, std::size_t k, double smoothing) {
  require(num_groups > 0 && k > 0, ErrorCode::InvalidArgument, "need groups and labels");
  require(smoothing >= 0.0, ErrorCode::InvalidArgument, "smoothing must be >= 0");
  const auto kk = static_cast<Eigen::Index>(k);
  std::vector<Eigen::MatrixXd> counts(num_groups, Eigen::MatrixXd::Zero(kk, kk));
  std::vector<std::size_t> seen(num_groups, 0);
  for (const auto& r : data) {
    const std::size_t g = grouping(r.x);
    require(g < num_groups, ErrorCode::InvalidArgument, "grouping returned an unknown group");
    require(r.y1 >= 0 && r.y2 >= 0 && static_cast<std::size_t>(r.y1) < k && static_cast<std::size_t>(r.y2) < k,
            ErrorCode::InvalidArgument, "label out of range");
    counts[g](r.y1, r.y2) += 1.0;
    ++seen[g];
  }
  std::vector<JointPairDistribution> table;
  table.reserve(num_groups);
  for (std::size_t g = 0; g < num_groups; ++g) {
    require(seen[g] > 0, ErrorCode::EmptyGroup, "group " + std::to_string(g) + " has no records");
    Eigen::MatrixXd sym = 0.5 * (counts[g] + counts[g].transpose());
    sym.array() += smoothing;
    table.emplace_back(sym / sym.sum());
  }
  return TabularPairModel<X>(std::move(grouping), std::move(table));
}

/// Finite mixture over component distributions on an arbitrary response
/// type. The pair prediction is Σ_c w_c p_c(y1) p_c(y2), which is what an
/// exactly calibrated pair model reports for a group made of these components.
template <class Y>
class MixturePairModel {
 public:
  struct Component {
    double weight = 1.0;
    std::function<double(const Y&)> prob;
    std::function<Y(Rng&)> sample;
  };

  explicit MixturePairModel(std::vector<Component> components) : components_(std::move(components)) {
    require(!components_.empty(), ErrorCode::EmptyInput, "mixture needs components");
    double total = 0.0;
    for (const auto& c : components_) {
      require(c.weight >= 0.0, ErrorCode::InvalidArgument, "negative component weight");
      total += c.weight;
    }
    require(total > 0.0, ErrorCode::EmptyGroup, "component weights sum to zero");
    for (auto& c : components_) c.weight /= total;
  }

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Component>& components() const noexcept { return components_; }

  std::vector<double> component_probs(const Y& y) const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.prob(y));
    return out;
  }

  double marginal(const Y& y) const {
    double s = 0.0;
    for (const auto& c : components_) s += c.weight * c.prob(y);
    return s;
  }

  double pair(const Y& a, const Y& b) const {
    double s = 0.0;
    for (const auto& c : components_) s += c.weight * c.prob(a) * c.prob(b);
    return s;
  }

  CheatScore score(const Y& y, std::string label) const {
    double m = 0.0, p2 = 0.0;
    for (const auto& c : components_) {
      const double q = c.prob(y);
      m += c.weight * q;
      p2 += c.weight * q * q;
    }
    return cheat_score_from_pair(std::move(label), m, p2);
  }

  /// Draws from the first-response marginal.
  Y sample(Rng& rng) const {
    double u = rng.uniform();
    for (const auto& c : components_) {
      if (u < c.weight) return c.sample(rng);
      u -= c.weight;
    }
    return components_.back().sample(rng);
  }

 private:
  std::vector<Component> components_;
};

/// p̂(1 - p̂).
double naive_variance(double p_hat);

struct EnsembleEstimate {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n - 1 divisor
};

/// Mean and unbiased sample variance of member predictions; needs >= 2 members.
EnsembleEstimate ensemble_predict(std::span<const double> member_predictions);

}  // namespace paircal
