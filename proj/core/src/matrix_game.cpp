#include "fmh/matrix_game.hpp"

#include <cmath>

namespace fmh::game {
namespace {

using fmh::num::require;

// True if `cand` strictly beats `other` for `player` against every surviving
// opposing strategy.
bool strictly_dominates(const BiMatrixGame& g, int player, int cand, int other,
                        const std::vector<int>& opponent_survivors) {
  for (int opp : opponent_survivors) {
    const double cand_pay = player == 0 ? g.x_payoff[cand][opp] : g.y_payoff[opp][cand];
    const double other_pay = player == 0 ? g.x_payoff[other][opp] : g.y_payoff[opp][other];
    if (!(cand_pay > other_pay)) return false;
  }
  return true;
}

// If `player` has a strictly dominated surviving strategy, remove it and
// record the elimination. At most one removal per call.
bool eliminate_one(const BiMatrixGame& g, int player, std::vector<int>& own,
                   const std::vector<int>& opponent, std::vector<Elimination>& trace) {
  if (own.size() < 2) return false;
  for (std::size_t i = 0; i < own.size(); ++i) {
    for (std::size_t j = 0; j < own.size(); ++j) {
      if (i == j) continue;
      if (strictly_dominates(g, player, own[j], own[i], opponent)) {
        trace.push_back({player, own[i]});
        own.erase(own.begin() + static_cast<std::ptrdiff_t>(i));
        return true;
      }
    }
  }
  return false;
}

}  // namespace

bool BiMatrixGame::finite() const {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!std::isfinite(x_payoff[i][j]) || !std::isfinite(y_payoff[i][j])) return false;
  return true;
}

std::vector<ActionPair> enumerate_pure_nash(const BiMatrixGame& game) {
  require(game.finite(), "enumerate_pure_nash: payoffs must be finite");
  std::vector<ActionPair> nash;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const bool x_happy = game.x_payoff[x][y] >= game.x_payoff[1 - x][y];
      const bool y_happy = game.y_payoff[x][y] >= game.y_payoff[x][1 - y];
      if (x_happy && y_happy) nash.push_back({x, y});
    }
  }
  return nash;
}

BiMatrixGame induce_feudal_game(const BiMatrixGame& game, FeudalGoal goal) {
  require(game.finite(), "induce_feudal_game: payoffs must be finite");
  BiMatrixGame induced = game;
  const int rewarded = static_cast<int>(goal);
  for (int x = 0; x < 2; ++x) {
    induced.y_payoff[x][rewarded] = 1.0;
    induced.y_payoff[x][1 - rewarded] = 0.0;
  }
  return induced;
}

EliminationResult iterated_elimination(const BiMatrixGame& game, bool scan_x_first) {
  require(game.finite(), "iterated_elimination: payoffs must be finite");
  EliminationResult result;
  result.x_survivors = {0, 1};
  result.y_survivors = {0, 1};
  bool removed = true;
  while (removed) {
    if (scan_x_first) {
      removed = eliminate_one(game, 0, result.x_survivors, result.y_survivors, result.trace) ||
                eliminate_one(game, 1, result.y_survivors, result.x_survivors, result.trace);
    } else {
      removed = eliminate_one(game, 1, result.y_survivors, result.x_survivors, result.trace) ||
                eliminate_one(game, 0, result.x_survivors, result.y_survivors, result.trace);
    }
  }
  return result;
}

std::optional<ActionPair> solve_feudal(const BiMatrixGame& game, FeudalGoal goal) {
  const EliminationResult reduced = iterated_elimination(induce_feudal_game(game, goal));
  if (!reduced.unique()) return std::nullopt;
  return ActionPair{reduced.x_survivors.front(), reduced.y_survivors.front()};
}

std::vector<std::optional<ActionPair>> solve_feudal_per_worker(
    const BiMatrixGame& base, const std::vector<FeudalGoal>& goals) {
  std::vector<std::optional<ActionPair>> solutions;
  solutions.reserve(goals.size());
  for (FeudalGoal goal : goals) solutions.push_back(solve_feudal(base, goal));
  return solutions;
}

}  // namespace fmh::game
