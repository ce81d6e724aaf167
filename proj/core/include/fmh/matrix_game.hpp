#pragma once

#include <optional>
#include <vector>

#include "fmh/matrix.hpp"

namespace fmh::game {

/// Two-player two-action game in normal form. Row player is X (the manager
/// in the feudal reading), column player is Y (the worker). Action index
/// 0 is A, 1 is B.
struct BiMatrixGame {
  double x_payoff[2][2];  // [x_action][y_action]
  double y_payoff[2][2];

  bool finite() const;
};

enum class FeudalGoal { kGoalA = 0, kGoalB = 1 };

struct ActionPair {
  int x = 0;
  int y = 0;
  bool operator==(const ActionPair&) const = default;
};

/// One elimination event: `player` 0 means X, 1 means Y; `action` is the
/// strategy removed.
struct Elimination {
  int player = 0;
  int action = 0;
  bool operator==(const Elimination&) const = default;
};

struct EliminationResult {
  std::vector<int> x_survivors;  // ascending action indices
  std::vector<int> y_survivors;
  std::vector<Elimination> trace;

  bool unique() const { return x_survivors.size() == 1 && y_survivors.size() == 1; }
};

/// All pure profiles where neither player gains by unilateral deviation.
/// Ties count as equilibria. Ordered (A,A),(A,B),(B,A),(B,B).
std::vector<ActionPair> enumerate_pure_nash(const BiMatrixGame& game);

/// Rewrite Y's payoffs so the goal action pays 1 and the other pays 0,
/// independent of what X does. X's payoffs are untouched. This makes the
/// goal action strictly dominant for Y in the induced game.
BiMatrixGame induce_feudal_game(const BiMatrixGame& game, FeudalGoal goal);

/// Iterated elimination of strictly dominated pure strategies. One strategy
/// is removed per round; `scan_x_first` controls which player is examined
/// first in each round, which can reorder the trace but (for these 2x2
/// instances) never changes the surviving sets.
EliminationResult iterated_elimination(const BiMatrixGame& game, bool scan_x_first = true);

/// The unique profile surviving iterated elimination of the induced game,
/// or nothing if elimination leaves more than one — an unresolved game is
/// reported, never guessed at.
std::optional<ActionPair> solve_feudal(const BiMatrixGame& game, FeudalGoal goal);

/// Separable many-worker coordination: the manager plays the same base game
/// against each worker independently and sends one goal per worker. Each
/// entry is that pairwise feudal solution. This assumes the joint payoff
/// decomposes additively over manager-worker pairs; the source analysis
/// asserts N-player coordination via N-1 goals without a construction, and
/// this wrapper is only valid under that separability assumption.
std::vector<std::optional<ActionPair>> solve_feudal_per_worker(
    const BiMatrixGame& base, const std::vector<FeudalGoal>& goals);

}  // namespace fmh::game
