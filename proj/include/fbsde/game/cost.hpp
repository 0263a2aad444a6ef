#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fbsde/core/statistics.hpp"
#include "fbsde/game/scenario.hpp"
#include "fbsde/game/strategy.hpp"
#include "fbsde/game/wealth.hpp"

namespace fbsde {

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double running_part = 0.0;   // E int running cost
  double terminal_part = 0.0;  // E[Z(T) Phi]
  double initial_part = 0.0;   // gamma(y(0)), here M_i y(0)
};

// Per-path samples of int_0^T L e^{-beta t} I^2 dt (left-endpoint sums).
inline std::vector<double> running_cost_samples(const StrategyProcess& s, double weight_l,
                                                double beta, const TimeGrid& grid) {
  std::vector<double> disc(grid.n_steps());
  for (std::size_t j = 0; j < grid.n_steps(); ++j) {
    disc[j] = weight_l * std::exp(-beta * grid.time(j)) * grid.dt();
  }
  std::vector<double> out(s.values.paths());
  for (std::size_t p = 0; p < s.values.paths(); ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) acc += disc[j] * s(p, j) * s(p, j);
    out[p] = acc;
  }
  return out;
}

// J_i = E int_0^T L_i e^{-beta t} I_i^2 dt + M_i y(0).
inline CostEstimate cost_functional(const CostParams& cost, int player, const TimeGrid& grid,
                                    const StrategyProcess& own, const WealthEstimate& y0) {
  require_player(player);
  if (y0.samples.size() != own.values.paths()) {
    throw InvalidArgument("cost_functional: wealth samples do not match the strategy");
  }
  const double weight_l = cost.L(player);
  const double weight_m = cost.M(player);
  const auto running = running_cost_samples(own, weight_l, cost.beta, grid);
  std::vector<double> total(running.size());
  for (std::size_t p = 0; p < running.size(); ++p) total[p] = running[p] + weight_m * y0.samples[p];
  const auto e = estimate_mean(total);
  CostEstimate c;
  c.mean = e.mean;
  c.std_error = e.std_error;
  c.n_paths = e.n;
  c.running_part = estimate_mean(running).mean;
  c.initial_part = weight_m * y0.value;
  return c;
}

// Cost under the reference measure with a Girsanov weight:
//   J = E[ int Z l dt + Z(T) Phi ] + gamma(y(0)).
inline CostEstimate girsanov_cost(const TimeGrid& grid, const RealPath& weight,
                                  const RealPath& running, std::span<const double> terminal,
                                  double initial_term) {
  if (weight.points() != grid.n_nodes() || !weight.same_layout(running) ||
      terminal.size() != weight.paths()) {
    throw InvalidArgument("girsanov_cost: weight, running cost and terminal cost shapes disagree");
  }
  std::vector<double> run(weight.paths());
  std::vector<double> term(weight.paths());
  std::vector<double> total(weight.paths());
  for (std::size_t p = 0; p < weight.paths(); ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) acc += weight(p, j) * running(p, j);
    run[p] = acc * grid.dt();
    term[p] = weight(p, grid.n_steps()) * terminal[p];
    total[p] = run[p] + term[p];
  }
  const auto e = estimate_mean(total);
  CostEstimate c;
  c.mean = e.mean + initial_term;
  c.std_error = e.std_error;
  c.n_paths = e.n;
  c.running_part = estimate_mean(run).mean;
  c.terminal_part = estimate_mean(term).mean;
  c.initial_part = initial_term;
  return c;
}

}  // namespace fbsde
