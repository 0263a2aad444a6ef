#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/ito.hpp"
#include "fbsde/filter/kalman_bucy.hpp"
#include "fbsde/filter/riccati.hpp"
#include "fbsde/game/scenario.hpp"

namespace fbsde {

// Everything one Monte Carlo run of the game needs, simulated from a bundle.
// Blocks 1 and 2 carry observations and filters; block 0 is never observed.
struct MarketState {
  TimeGrid grid{1.0, 2};
  std::size_t n_paths = 0;
  std::array<RealPath, kBlocks> mu;         // true appreciation rates
  std::array<RealPath, kBlocks> b;          // Sigma^{-1}(mu - r 1)
  std::array<RealPath, kBlocks> y;          // observations (blocks 1, 2)
  std::array<std::optional<FilterOutput>, kBlocks> filter;
  std::array<RealPath, kBlocks> b_hat;      // filtered b (blocks 1, 2)
  std::array<RealPath, kBlocks> filtered_deflator;  // E[D | F^i] in closed form
  RealPath deflator;                        // D(t)
  std::vector<double> xi;                   // terminal claim per path
};

// D(t) = e^{-int r} exp{ -sum_k int b^k dW^k - 1/2 sum_k int |b^k|^2 }.
// Empty blocks are skipped.
inline RealPath deflator(const TimeGrid& grid, const ShortRate& rate,
                         std::span<const RealPath> b, std::span<const Increments> dW) {
  if (b.size() != dW.size()) throw InvalidArgument("deflator: block count mismatch");
  const auto log_disc = detail::log_discount(rate, grid);
  std::size_t n_paths = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!dW[k].empty()) n_paths = dW[k].paths();
  }
  if (n_paths == 0) throw InvalidArgument("deflator: no driving noise");
  RealPath log_d(n_paths, grid.n_nodes(), 1);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t j = 0; j < grid.n_nodes(); ++j) log_d(p, j) = log_disc[j];
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (dW[k].empty() && b[k].empty()) continue;
    detail::require_grid(dW[k], grid, "deflator");
    const RealPath part = detail::log_stochastic_exponential(b[k], dW[k], -1, grid.dt());
    if (part.paths() != n_paths) throw InvalidArgument("deflator: path count mismatch");
    for (std::size_t p = 0; p < n_paths; ++p) {
      for (std::size_t j = 0; j < grid.n_nodes(); ++j) log_d(p, j) += part(p, j);
    }
  }
  return detail::exponentiate(std::move(log_d));
}

// p_i(t) = -M_i D(t).
inline RealPath adjoint_p(double terminal_weight, const RealPath& deflator_path) {
  if (!(terminal_weight > 0.0)) throw InvalidArgument("adjoint_p: M_i must be positive");
  RealPath p = deflator_path;
  for (double& v : p.raw()) v *= -terminal_weight;
  return p;
}

// Euler scheme of dp = -r p dt - sum_k (b^k)^T p dW^k, p(0) = -M_i.
inline RealPath adjoint_p_euler(double terminal_weight, const TimeGrid& grid, const ShortRate& rate,
                                std::span<const RealPath> b, std::span<const Increments> dW) {
  if (!(terminal_weight > 0.0)) throw InvalidArgument("adjoint_p: M_i must be positive");
  std::size_t n_paths = 0;
  for (const auto& d : dW) {
    if (!d.empty()) n_paths = d.paths();
  }
  RealPath p(n_paths, grid.n_nodes(), 1);
  for (std::size_t q = 0; q < n_paths; ++q) {
    p(q, 0) = -terminal_weight;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      double noise = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) {
        if (dW[k].empty()) continue;
        for (std::size_t c = 0; c < dW[k].dim(); ++c) noise += b[k](q, j, c) * dW[k](q, j, c);
      }
      const double cur = p(q, j);
      p(q, j + 1) = cur - rate(grid.time(j)) * cur * grid.dt() - noise * cur;
    }
  }
  return p;
}

inline MarketState simulate_market(const GameScenario& scenario, const PathBundle& bundle) {
  scenario.validate();
  if (!(bundle.grid == scenario.grid) || bundle.dims != scenario.dims()) {
    throw InvalidArgument("simulate_market: bundle does not match the scenario grid or dims");
  }
  const TimeGrid& grid = scenario.grid;
  MarketState m;
  m.grid = grid;
  m.n_paths = bundle.n_paths;

  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (!scenario.has_block(k)) continue;
    const OUParams& ou = scenario.drift(k);
    const ObservationModel obs = scenario.observation(k);
    const std::size_t n = scenario.blocks[k]->dim();
    const Matrix factor = ou.prior_factor();
    std::vector<double> init(bundle.n_paths * n);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = ou.m0(static_cast<Eigen::Index>(i));
        for (std::size_t l = 0; l < n; ++l) v += factor(i, l) * bundle.prior_normal(k, p, l);
        init[p * n + i] = v;
      }
    }
    m.mu[k] = simulate_ou_drift(ou, bundle.dWbar[k], grid, init);
    m.b[k] = filtered_b(m.mu[k], obs, grid);
    if (k == 0) continue;

    m.y[k] = synthesize_observations(m.mu[k], obs, bundle.dW[k], grid);
    m.filter[k] = run_kalman_bucy(m.y[k], ou, obs, solve_riccati(ou, obs, grid), grid);
    m.b_hat[k] = filtered_b(m.filter[k]->mean, obs, grid);
    m.filtered_deflator[k] = filtered_adjoint(m.b_hat[k], obs, 1.0, m.filter[k]->innovation, grid);
    for (double& v : m.filtered_deflator[k].raw()) v = -v;
  }

  m.deflator = deflator(grid, constant_rate(scenario.rate), m.b, bundle.dW);

  m.xi.resize(bundle.n_paths);
  const std::size_t last = grid.n_steps();
  for (std::size_t p = 0; p < bundle.n_paths; ++p) {
    double observed = 0.0;
    for (std::size_t k = 1; k < kBlocks; ++k) {
      for (std::size_t c = 0; c < m.y[k].dim(); ++c) observed += m.y[k](p, last, c);
    }
    double unobserved = 0.0;
    if (scenario.has_block(0)) {
      for (std::size_t j = 0; j < grid.n_steps(); ++j) {
        for (std::size_t c = 0; c < bundle.dims[0]; ++c) unobserved += bundle.dW[0](p, j, c);
      }
    }
    m.xi[p] = scenario.terminal.evaluate(observed, unobserved);
  }
  return m;
}

// p_hat_i = -M_i E[D | F^i] from the filter closed form.
inline RealPath filtered_adjoint_of(const MarketState& m, int player, double terminal_weight) {
  return adjoint_p(terminal_weight, m.filtered_deflator[static_cast<std::size_t>(player)]);
}

}  // namespace fbsde
