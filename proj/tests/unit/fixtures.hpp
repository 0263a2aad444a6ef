#pragma once

#include "fbsde/game/scenario.hpp"

namespace fixtures {

// Default market with fewer paths.
inline fbsde::GameScenario small_default(std::size_t n_paths, std::size_t n_steps = 64) {
  fbsde::GameScenario s = fbsde::default_scenario();
  s.grid = fbsde::TimeGrid(1.0, n_steps);
  s.n_paths = n_paths;
  return s;
}

// r = 0 and every drift pinned at 0: b = 0, D = 1, constant candidates.
inline fbsde::GameScenario deterministic(std::size_t n_paths = 200, double xi = 5.0) {
  fbsde::GameScenario s = fbsde::default_scenario();
  s.grid = fbsde::TimeGrid(1.0, 64);
  s.rate = 0.0;
  for (auto& b : s.blocks) {
    b->drift.delta.setZero();
    b->drift.zeta.setZero();
    b->drift.m0.setZero();
    b->drift.P0.setZero();
  }
  s.cost.beta = 0.0;
  s.terminal.value = xi;
  s.n_paths = n_paths;
  return s;
}

// Both drifts frozen at their (uncertain) prior draw: only learning moves b_hat.
inline fbsde::GameScenario frozen_drift(std::size_t n_paths, std::size_t n_steps) {
  fbsde::GameScenario s = small_default(n_paths, n_steps);
  for (auto& b : s.blocks) b->drift.zeta.setZero();
  return s;
}

}  // namespace fixtures
