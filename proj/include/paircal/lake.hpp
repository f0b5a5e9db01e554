// SPDX-License-Identifier: Apache-2.0
//
// Frozen Lake imitation task on a 5×5 grid (r0 is the top row):
//
//   P P P P P
//   P L L L P
//   S L L L G
//   P L L L P
//   P P P P P
//
// Entering a cell gives goal +40 (episode ends), border or start -3, lake
// -5, centre lake cell -10. One lake cell is an unsafe patch; moving onto
// it or off the grid is forbidden. Experts are soft-Q optimal with
// discount 0.9 and temperature 2.5; episodes last at most 16 steps.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paircal/example.hpp"
#include "paircal/metrics.hpp"
#include "paircal/random.hpp"

namespace paircal {

struct Cell {
  int c = 0;
  int r = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class Action : std::uint8_t { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr int kLakeSize = 5;
inline constexpr int kLakeCells = kLakeSize * kLakeSize;
inline constexpr std::size_t kLakeHorizon = 16;
inline constexpr double kLakeDiscount = 0.9;
inline constexpr double kLakeTemperature = 2.5;
inline constexpr Cell kLakeStart{0, 2};
inline constexpr Cell kLakeGoal{4, 2};
inline constexpr int kLakePatches = 9;

bool is_lake(Cell cell);
/// Patch index k in 0..8 is the cell (1 + k % 3, 1 + k / 3).
Cell patch_cell(int patch);
int patch_index(Cell cell);
/// Cell reached by `a`, or nullopt when it leaves the grid.
std::optional<Cell> lake_step(Cell from, Action a);
/// Reward for entering `to` with unsafe patch `patch`; -inf for the patch.
double lake_reward(Cell to, Cell patch);

struct LakePolicy {
  Cell patch;
  std::array<std::array<double, 4>, kLakeCells> q{};      // soft Q-values, -inf if forbidden
  std::array<std::array<double, 4>, kLakeCells> probs{};  // softmax(Q / temperature)
  std::size_t sweeps = 0;

  const std::array<double, 4>& at(Cell s) const { return probs[static_cast<std::size_t>(s.r * kLakeSize + s.c)]; }
};

/// Soft-Q value iteration until the largest change is below 1e-10.
/// Throws NonConvergence after `max_sweeps`.
LakePolicy lake_expert(Cell patch, std::size_t max_sweeps = 10000);

using Trajectory = std::vector<Action>;

/// Cells visited, starting with the start cell. Stops at the goal or at an
/// off-grid move.
std::vector<Cell> trajectory_cells(const Trajectory& y);
bool touches_lake(const Trajectory& y);
bool touches_cell(const Trajectory& y, Cell cell);

/// Probability of a complete episode (ends at the goal, or has exactly 16
/// steps without reaching it). Throws TrajectoryTooLong beyond 16 steps.
double trajectory_probability(const LakePolicy& policy, const Trajectory& y);

Trajectory sample_trajectory(const LakePolicy& policy, Rng& rng);

/// Compact key: 2 bits per action plus the length.
std::uint64_t trajectory_key(const Trajectory& y);
/// "c0 r2 right c1 r2 right ... FINISH".
std::string trajectory_label(const Trajectory& y);
std::string to_string(Action a);
Action action_from_string(const std::string& s);

struct LakeView {
  bool hidden = true;
  int patch = -1;  // patch index when visible

  static LakeView full(int patch) { return {false, patch}; }
  static LakeView hidden_view() { return {true, -1}; }
};

/// Exact pair model for each view: the expert for a visible patch, or the
/// uniform mixture over the nine experts when the patch is hidden.
class LakePairOracle {
 public:
  LakePairOracle();

  const LakePolicy& expert(int patch) const { return experts_.at(static_cast<std::size_t>(patch)); }
  /// Per-patch probabilities of y.
  std::array<double, kLakePatches> patch_probs(const Trajectory& y) const;
  double marginal(const LakeView& view, const Trajectory& y) const;
  double pair_same(const LakeView& view, const Trajectory& y) const;
  CheatScore score(const LakeView& view, const Trajectory& y) const;
  Trajectory sample(const LakeView& view, Rng& rng) const;

 private:
  std::array<LakePolicy, kLakePatches> experts_;
};

/// Patch uniform over the nine lake cells, hidden with probability
/// `hidden_fraction`, two expert episodes under the same patch.
std::vector<PairedExample<LakeView, Trajectory>> lake_dataset(std::size_t n, double hidden_fraction,
                                                              std::uint64_t seed);

}  // namespace paircal
