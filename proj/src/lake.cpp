// SPDX-License-Identifier: Apache-2.0
#include "paircal/lake.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "paircal/parallel.hpp"

namespace paircal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kLakePatchStream = 0x1A4E;
constexpr std::uint64_t kLakeEpisodeStream = 0x1A4F;
constexpr std::array<Action, 4> kActions{Action::Left, Action::Right, Action::Up, Action::Down};

std::size_t idx(Cell s) { return static_cast<std::size_t>(s.r * kLakeSize + s.c); }

double log_sum_exp(const std::array<double, 4>& v, double scale) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x / scale);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x / scale - m);
  return m + std::log(s);
}

}  // namespace

bool is_lake(Cell cell) { return cell.c >= 1 && cell.c <= 3 && cell.r >= 1 && cell.r <= 3; }

Cell patch_cell(int patch) {
  require(patch >= 0 && patch < kLakePatches, ErrorCode::InvalidArgument, "patch index must be 0..8");
  return {1 + patch % 3, 1 + patch / 3};
}

int patch_index(Cell cell) {
  require(is_lake(cell), ErrorCode::InvalidArgument, "the unsafe patch must be a lake cell");
  return (cell.r - 1) * 3 + (cell.c - 1);
}

std::optional<Cell> lake_step(Cell from, Action a) {
  Cell to = from;
  switch (a) {
    case Action::Left: --to.c; break;
    case Action::Right: ++to.c; break;
    case Action::Up: --to.r; break;
    case Action::Down: ++to.r; break;
  }
  if (to.c < 0 || to.c >= kLakeSize || to.r < 0 || to.r >= kLakeSize) return std::nullopt;
  return to;
}

double lake_reward(Cell to, Cell patch) {
  if (to == patch) return kNegInf;
  if (to == kLakeGoal) return 40.0;
  if (to == Cell{2, 2}) return -10.0;
  if (is_lake(to)) return -5.0;
  return -3.0;
}

LakePolicy lake_expert(Cell patch, std::size_t max_sweeps) {
  require(is_lake(patch), ErrorCode::InvalidArgument, "the unsafe patch must be a lake cell");
  LakePolicy pol;
  pol.patch = patch;
  std::array<std::array<double, 4>, kLakeCells> q{};
  for (int r = 0; r < kLakeSize; ++r)
    for (int c = 0; c < kLakeSize; ++c)
      for (std::size_t a = 0; a < 4; ++a) {
        const auto to = lake_step({c, r}, kActions[a]);
        q[idx({c, r})][a] = (!to || *to == patch) ? kNegInf : 0.0;
      }

  double change = INFINITY;
  std::size_t sweep = 0;
  while (change >= 1e-10) {
    require(sweep < max_sweeps, ErrorCode::NonConvergence, "soft-Q iteration did not converge");
    std::array<double, kLakeCells> v{};
    for (int s = 0; s < kLakeCells; ++s) v[static_cast<std::size_t>(s)] = kLakeTemperature * log_sum_exp(q[static_cast<std::size_t>(s)], kLakeTemperature);
    v[idx(kLakeGoal)] = 0.0;  // terminal
    change = 0.0;
    for (int r = 0; r < kLakeSize; ++r)
      for (int c = 0; c < kLakeSize; ++c) {
        const Cell s{c, r};
        if (s == kLakeGoal || s == patch) continue;
        for (std::size_t a = 0; a < 4; ++a) {
          const auto to = lake_step(s, kActions[a]);
          if (!to || *to == patch) continue;
          const double next = lake_reward(*to, patch) + kLakeDiscount * v[idx(*to)];
          change = std::max(change, std::abs(next - q[idx(s)][a]));
          q[idx(s)][a] = next;
        }
      }
    ++sweep;
  }
  pol.q = q;
  pol.sweeps = sweep;
  for (int s = 0; s < kLakeCells; ++s) {
    const auto& row = q[static_cast<std::size_t>(s)];
    const double lse = log_sum_exp(row, kLakeTemperature);
    for (std::size_t a = 0; a < 4; ++a)
      pol.probs[static_cast<std::size_t>(s)][a] = row[a] == kNegInf ? 0.0 : std::exp(row[a] / kLakeTemperature - lse);
  }
  return pol;
}

std::vector<Cell> trajectory_cells(const Trajectory& y) {
  std::vector<Cell> cells{kLakeStart};
  for (Action a : y) {
    if (cells.back() == kLakeGoal) break;
    const auto to = lake_step(cells.back(), a);
    if (!to) break;
    cells.push_back(*to);
  }
  return cells;
}

bool touches_lake(const Trajectory& y) {
  const auto cells = trajectory_cells(y);
  return std::any_of(cells.begin(), cells.end(), is_lake);
}

bool touches_cell(const Trajectory& y, Cell cell) {
  const auto cells = trajectory_cells(y);
  return std::find(cells.begin(), cells.end(), cell) != cells.end();
}

double trajectory_probability(const LakePolicy& policy, const Trajectory& y) {
  require(y.size() <= kLakeHorizon, ErrorCode::TrajectoryTooLong, "trajectory longer than 16 steps");
  Cell s = kLakeStart;
  double p = 1.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (s == kLakeGoal) return 0.0;  // actions after the episode ended
    p *= policy.at(s)[static_cast<std::size_t>(y[t])];
    if (p == 0.0) return 0.0;
    s = *lake_step(s, y[t]);
  }
  if (s != kLakeGoal && y.size() != kLakeHorizon) return 0.0;  // incomplete episode
  return p;
}

Trajectory sample_trajectory(const LakePolicy& policy, Rng& rng) {
  Trajectory y;
  Cell s = kLakeStart;
  while (s != kLakeGoal && y.size() < kLakeHorizon) {
    const auto& pr = policy.at(s);
    double u = rng.uniform();
    std::size_t chosen = 4;
    for (std::size_t a = 0; a < 4; ++a) {
      if (pr[a] == 0.0) continue;
      chosen = a;
      if (u < pr[a]) break;
      u -= pr[a];
    }
    y.push_back(kActions[chosen]);
    s = *lake_step(s, kActions[chosen]);
  }
  return y;
}

std::uint64_t trajectory_key(const Trajectory& y) {
  require(y.size() <= kLakeHorizon, ErrorCode::TrajectoryTooLong, "trajectory longer than 16 steps");
  std::uint64_t k = y.size();
  for (std::size_t t = 0; t < y.size(); ++t) k |= static_cast<std::uint64_t>(y[t]) << (5 + 2 * t);
  return k;
}

std::string to_string(Action a) {
  switch (a) {
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Up: return "up";
    case Action::Down: return "down";
  }
  return "?";
}

Action action_from_string(const std::string& s) {
  for (Action a : kActions)
    if (to_string(a) == s) return a;
  fail(ErrorCode::InvalidArgument, "unknown action '" + s + "'");
}

std::string trajectory_label(const Trajectory& y) {
  std::string out;
  Cell s = kLakeStart;
  for (Action a : y) {
    out += "c" + std::to_string(s.c) + " r" + std::to_string(s.r) + " " + to_string(a) + " ";
    const auto to = lake_step(s, a);
    if (!to) {
      out += "OFFGRID";
      return out;
    }
    s = *to;
  }
  out += s == kLakeGoal ? "FINISH" : "STOP";
  return out;
}

LakePairOracle::LakePairOracle()
    : experts_{lake_expert(patch_cell(0)), lake_expert(patch_cell(1)), lake_expert(patch_cell(2)),
               lake_expert(patch_cell(3)), lake_expert(patch_cell(4)), lake_expert(patch_cell(5)),
               lake_expert(patch_cell(6)), lake_expert(patch_cell(7)), lake_expert(patch_cell(8))} {}

std::array<double, kLakePatches> LakePairOracle::patch_probs(const Trajectory& y) const {
  std::array<double, kLakePatches> out{};
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = trajectory_probability(experts_[k], y);
  return out;
}

double LakePairOracle::marginal(const LakeView& view, const Trajectory& y) const {
  if (!view.hidden) return trajectory_probability(expert(view.patch), y);
  const auto q = patch_probs(y);
  double s = 0.0;
  for (double v : q) s += v;
  return s / kLakePatches;
}

double LakePairOracle::pair_same(const LakeView& view, const Trajectory& y) const {
  if (!view.hidden) {
    const double q = trajectory_probability(expert(view.patch), y);
    return q * q;
  }
  const auto q = patch_probs(y);
  double s = 0.0;
  for (double v : q) s += v * v;
  return s / kLakePatches;
}

CheatScore LakePairOracle::score(const LakeView& view, const Trajectory& y) const {
  if (!view.hidden) {
    const double q = trajectory_probability(expert(view.patch), y);
    return cheat_score_from_pair(trajectory_label(y), q, q * q);
  }
  const auto q = patch_probs(y);
  double m = 0.0, m2 = 0.0;
  for (double v : q) {
    m += v;
    m2 += v * v;
  }
  return cheat_score_from_pair(trajectory_label(y), m / kLakePatches, m2 / kLakePatches);
}

Trajectory LakePairOracle::sample(const LakeView& view, Rng& rng) const {
  int patch = view.patch;
  if (view.hidden) patch = std::min(kLakePatches - 1, static_cast<int>(rng.uniform() * kLakePatches));
  return sample_trajectory(expert(patch), rng);
}

std::vector<PairedExample<LakeView, Trajectory>> lake_dataset(std::size_t n, double hidden_fraction,
                                                              std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  require(hidden_fraction >= 0.0 && hidden_fraction <= 1.0, ErrorCode::InvalidArgument,
          "hidden_fraction must lie in [0,1]");
  std::array<LakePolicy, kLakePatches> experts;
  for (int k = 0; k < kLakePatches; ++k) experts[static_cast<std::size_t>(k)] = lake_expert(patch_cell(k));
  std::vector<PairedExample<LakeView, Trajectory>> out(n);
  for_each_chunk(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng head = substream(seed, kLakePatchStream, i);
      Rng episodes = substream(seed, kLakeEpisodeStream, i);
      const int patch = std::min(kLakePatches - 1, static_cast<int>(head.uniform() * kLakePatches));
      const bool hidden = head.uniform() < hidden_fraction;
      const auto& pol = experts[static_cast<std::size_t>(patch)];
      out[i].x = hidden ? LakeView::hidden_view() : LakeView::full(patch);
      out[i].y1 = sample_trajectory(pol, episodes);
      out[i].y2 = sample_trajectory(pol, episodes);
      out[i].shared_latent = patch;
    }
  });
  return out;
}

}  // namespace paircal
