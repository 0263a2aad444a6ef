#pragma once

#include <functional>

#include "fbsde/core/brownian.hpp"
#include "fbsde/game/market.hpp"
#include "fbsde/game/scenario.hpp"
#include "fbsde/game/strategy.hpp"

namespace fbsde {

using StrategyBuilder = std::function<StrategyProcess(const MarketState&)>;

// Closed-form candidate of one manager, computed from that manager's filter.
inline StrategyBuilder candidate_builder(int player, const CostParams& cost) {
  require_player(player);
  return [player, cost](const MarketState& m) {
    return candidate_strategy(player, filtered_adjoint_of(m, player, cost.M(player)),
                              cost.L(player), cost.beta, m.grid);
  };
}

// One simulated instance of the game with both candidate strategies.
struct GameRun {
  GameScenario scenario;
  PathBundle bundle;
  MarketState market;
  StrategyProcess candidate1;
  StrategyProcess candidate2;

  const StrategyProcess& candidate(int player) const {
    return player == 1 ? candidate1 : candidate2;
  }
};

inline GameRun prepare_game(const GameScenario& scenario) {
  scenario.validate();
  GameRun run;
  run.scenario = scenario;
  run.bundle = sample_brownian_bundle(scenario.grid, scenario.dims(), scenario.n_paths, scenario.seed);
  run.market = simulate_market(scenario, run.bundle);
  run.candidate1 = candidate_builder(1, scenario.cost)(run.market);
  run.candidate2 = candidate_builder(2, scenario.cost)(run.market);
  return run;
}

}  // namespace fbsde
