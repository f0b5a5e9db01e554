// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "paircal/lake.hpp"
#include "paircal/models.hpp"
#include "support.hpp"

using namespace paircal;
using testing::error_of;

namespace {

Trajectory straight() { return Trajectory(4, Action::Right); }

// Around the top of the lake: up, four rights, down.
Trajectory over_the_top() {
  return {Action::Up, Action::Up, Action::Right, Action::Right, Action::Right, Action::Right, Action::Down,
          Action::Down};
}

}  // namespace

TEST_CASE("grid geometry") {
  CHECK(is_lake({1, 1}));
  CHECK(is_lake({3, 3}));
  CHECK_FALSE(is_lake({0, 2}));
  CHECK_FALSE(is_lake({4, 2}));
  for (int k = 0; k < kLakePatches; ++k) CHECK(patch_index(patch_cell(k)) == k);
  CHECK(patch_cell(4) == Cell{2, 2});
  CHECK_FALSE(lake_step({0, 2}, Action::Left).has_value());
  CHECK(*lake_step({0, 2}, Action::Up) == Cell{0, 1});
  CHECK(lake_reward({4, 2}, {1, 1}) == 40.0);
  CHECK(lake_reward({2, 2}, {1, 1}) == -10.0);
  CHECK(lake_reward({1, 2}, {1, 1}) == -5.0);
  CHECK(lake_reward({0, 0}, {1, 1}) == -3.0);
  CHECK(std::isinf(lake_reward({1, 1}, {1, 1})));
}

TEST_CASE("experts match an independent Boltzmann value iteration") {
  for (int k = 0; k < kLakePatches; ++k) {
    const Cell patch = patch_cell(k);
    const auto policy = lake_expert(patch);
    const auto ref = oracle::lake_boltzmann_policy(patch.c, patch.r);
    for (int r = 0; r < kLakeSize; ++r)
      for (int c = 0; c < kLakeSize; ++c) {
        const Cell s{c, r};
        if (s == kLakeGoal || s == patch) continue;
        const auto& p = policy.at(s);
        double total = 0.0;
        for (int a = 0; a < 4; ++a) {
          REQUIRE(std::abs(p[static_cast<std::size_t>(a)] - ref[static_cast<std::size_t>(r * 5 + c)][static_cast<std::size_t>(a)]) <= 1e-8);
          total += p[static_cast<std::size_t>(a)];
          const auto next = lake_step(s, static_cast<Action>(a));
          if (!next || *next == patch) CHECK(p[static_cast<std::size_t>(a)] == 0.0);
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
  }
  CHECK(error_of([] { lake_expert({2, 2}, 1); }) == ErrorCode::NonConvergence);
}

TEST_CASE("trajectory helpers") {
  const auto cells = trajectory_cells(straight());
  REQUIRE(cells.size() == 5);
  CHECK(cells.front() == kLakeStart);
  CHECK(cells.back() == kLakeGoal);
  CHECK(touches_lake(straight()));
  CHECK_FALSE(touches_lake(over_the_top()));
  CHECK(touches_cell(straight(), {2, 2}));
  CHECK(trajectory_label(straight()) == "c0 r2 right c1 r2 right c2 r2 right c3 r2 right FINISH");
  CHECK(action_from_string(to_string(Action::Down)) == Action::Down);
  CHECK(trajectory_key(straight()) != trajectory_key(over_the_top()));
  CHECK(trajectory_key(Trajectory{Action::Left}) != trajectory_key(Trajectory{Action::Left, Action::Left}));
  CHECK(error_of([] { trajectory_probability(lake_expert({1, 1}), Trajectory(17, Action::Up)); }) ==
        ErrorCode::TrajectoryTooLong);
}

TEST_CASE("trajectory probabilities follow the policy") {
  const auto policy = lake_expert({1, 3});
  double expect = 1.0;
  Cell s = kLakeStart;
  for (Action a : over_the_top()) {
    expect *= policy.at(s)[static_cast<std::size_t>(a)];
    s = *lake_step(s, a);
  }
  CHECK(std::abs(trajectory_probability(policy, over_the_top()) - expect) <= 1e-15 * std::max(1.0, expect));
  CHECK(trajectory_probability(policy, Trajectory{Action::Right, Action::Right}) == 0.0);  // incomplete

  // Sampled episode frequencies against the exact probability.
  Rng rng(11);
  const int n = 200000;
  std::map<std::uint64_t, double> freq;
  std::map<std::uint64_t, Trajectory> seen;
  for (int i = 0; i < n; ++i) {
    auto y = sample_trajectory(policy, rng);
    CHECK(y.size() <= kLakeHorizon);
    const auto k = trajectory_key(y);
    freq[k] += 1.0;
    seen.emplace(k, std::move(y));
  }
  std::size_t checked = 0;
  for (const auto& [k, f] : freq) {
    const double p = trajectory_probability(policy, seen[k]);
    REQUIRE(p > 0.0);
    if (f >= 500) {
      CHECK(std::abs(f / n - p) <= 4.5 * oracle::sigma(p, n));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("full view is certain") {
  const LakePairOracle oracle;
  for (int k = 0; k < kLakePatches; ++k) {
    Rng rng(static_cast<std::uint64_t>(k));
    for (int i = 0; i < 50; ++i) {
      const auto y = oracle.sample(LakeView::full(k), rng);
      const auto s = oracle.score(LakeView::full(k), y);
      CHECK(s.p_marginal > 0.0);
      CHECK(std::abs(s.confidence - 1.0) <= 1e-12);
      CHECK(!touches_cell(y, patch_cell(k)));
    }
  }
}

TEST_CASE("hidden view is the uniform mixture of experts") {
  const LakePairOracle oracle;
  const auto hidden = LakeView::hidden_view();
  for (const auto& y : {straight(), over_the_top()}) {
    const auto probs = oracle.patch_probs(y);
    double m = 0.0, s2 = 0.0;
    for (double p : probs) {
      m += p / 9.0;
      s2 += p * p / 9.0;
    }
    const auto sc = oracle.score(hidden, y);
    CHECK(std::abs(sc.p_marginal - m) <= 1e-15);
    CHECK(std::abs(oracle.pair_same(hidden, y) - s2) <= 1e-15);
    CHECK(std::abs(sc.v_cheat - (s2 - m * m)) <= 1e-15);
    CHECK(sc.confidence >= 0.0);
    CHECK(sc.confidence <= 1.0 + 1e-12);
  }

  // The straight path is blocked by the 3 patches in row 2. The other 6
  // experts give it probabilities p_k, so C = (Σp)² / (9 Σp²), close to 6/9.
  const auto probs = oracle.patch_probs(straight());
  double sum = 0.0, sq = 0.0;
  std::size_t zero = 0;
  for (double p : probs) {
    sum += p;
    sq += p * p;
    zero += p == 0.0;
  }
  CHECK(zero == 3);
  const double c = oracle.score(hidden, straight()).confidence;
  CHECK(std::abs(c - sum * sum / (9.0 * sq)) <= 1e-12);
  CHECK(c < 6.0 / 9.0 + 1e-12);
  CHECK(c > 0.6);
}

TEST_CASE("a mixture of nine experts where four give zero mass has C = 5/9") {
  using Comp = MixturePairModel<int>::Component;
  std::vector<Comp> comps;
  for (int k = 0; k < 9; ++k) {
    const double p = k < 5 ? 0.3 : 0.0;
    comps.push_back(Comp{1.0, [p](const int& y) { return y == 1 ? p : 1.0 - p; },
                         [p](Rng& r) { return r.uniform() < p ? 1 : 0; }});
  }
  const MixturePairModel<int> m(std::move(comps));
  CHECK(std::abs(m.score(1, "1").confidence - 5.0 / 9.0) <= 1e-12);
}

TEST_CASE("hidden view samples and confidences") {
  const LakePairOracle oracle;
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto y = oracle.sample(LakeView::hidden_view(), rng);
    const auto s = oracle.score(LakeView::hidden_view(), y);
    REQUIRE(s.p_marginal > 0.0);
    CHECK(s.confidence >= 0.0);
    CHECK(s.confidence <= 1.0 + 1e-12);
  }
}

TEST_CASE("lake dataset") {
  const auto d = lake_dataset(4000, 0.5, 3);
  REQUIRE(d.size() == 4000);
  std::size_t hidden = 0;
  double steps = 0.0;
  for (const auto& e : d) {
    REQUIRE(e.shared_latent.has_value());
    const int patch = *e.shared_latent;
    CHECK(patch >= 0);
    CHECK(patch < kLakePatches);
    hidden += e.x.hidden;
    if (!e.x.hidden) CHECK(e.x.patch == patch);
    CHECK(!touches_cell(e.y1, patch_cell(patch)));
    CHECK(!touches_cell(e.y2, patch_cell(patch)));
    CHECK(e.y1.size() <= kLakeHorizon);
    steps += static_cast<double>(e.y1.size());
  }
  CHECK(std::abs(static_cast<double>(hidden) / 4000.0 - 0.5) <= 4.0 * oracle::sigma(0.5, 4000));
  CHECK(steps / 4000.0 < 16.0);
  const auto again = lake_dataset(10, 0.5, 3);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].y1 == d[i].y1);
}
