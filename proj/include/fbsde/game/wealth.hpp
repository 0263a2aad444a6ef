#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/regression.hpp"
#include "fbsde/core/statistics.hpp"
#include "fbsde/game/market.hpp"
#include "fbsde/game/strategy.hpp"

namespace fbsde {

// Start-up capital y(0) with its Monte Carlo error. `samples` holds the
// per-path contributions whose mean is `value`.
struct WealthEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> samples;
};

namespace detail {

inline void require_admissible(const StrategyProcess& s, const TimeGrid& grid, std::size_t n_paths,
                               const char* what) {
  if (s.audit == AuditStatus::failed) {
    throw ContractViolation(std::string(what) + ": strategy of player " +
                            std::to_string(s.player) + " failed the adaptedness audit");
  }
  if (s.values.paths() != n_paths || s.values.points() != grid.n_nodes() || s.values.dim() != 1) {
    throw InvalidArgument(std::string(what) + ": strategy shape " + shape_of(s.values) +
                          " does not match the market");
  }
  for (double v : s.values.raw()) {
    if (v < 0.0) {
      throw InvalidArgument(std::string(what) + ": injections must be nonnegative (player " +
                            std::to_string(s.player) + ")");
    }
  }
}

}  // namespace detail

// Linear-BSDE representation y(0) = E[ D(T) xi - int_0^T D (I_1 + I_2) ds ]
// with left-endpoint time sums.
inline WealthEstimate wealth_y0(const TimeGrid& grid, const RealPath& deflator_path,
                                std::span<const double> xi, const StrategyProcess& first,
                                const StrategyProcess& second) {
  const std::size_t n_paths = deflator_path.paths();
  if (deflator_path.points() != grid.n_nodes() || xi.size() != n_paths) {
    throw InvalidArgument("wealth_y0: deflator or terminal claim does not match the grid");
  }
  detail::require_admissible(first, grid, n_paths, "wealth_y0");
  detail::require_admissible(second, grid, n_paths, "wealth_y0");
  const double dt = grid.dt();
  WealthEstimate w;
  w.samples.resize(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double injected = 0.0;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      injected += deflator_path(p, j) * (first(p, j) + second(p, j));
    }
    w.samples[p] = deflator_path(p, grid.n_steps()) * xi[p] - injected * dt;
  }
  const auto e = estimate_mean(w.samples);
  w.value = e.mean;
  w.std_error = e.std_error;
  return w;
}

inline WealthEstimate wealth_y0(const MarketState& m, const StrategyProcess& first,
                                const StrategyProcess& second) {
  return wealth_y0(m.grid, m.deflator, m.xi, first, second);
}

enum class LsmcBasis { constant = 0, linear = 1, quadratic = 2 };

struct BsdeSolution {
  RealPath y;                          // regression value of y at every node
  std::array<RealPath, kBlocks> z;     // z^k, empty for absent blocks
  WealthEstimate y0;
  double max_condition = 1.0;
};

namespace detail {

// State variables at node j the BSDE solution can depend on: true drifts,
// filter means, filtered deflators, observations (and W^0 when the claim
// reads it).
inline Eigen::MatrixXd lsmc_state(const GameScenario& scenario, const MarketState& m,
                                  const PathBundle& bundle, std::size_t j) {
  std::vector<std::pair<const RealPath*, std::size_t>> cols;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (!scenario.has_block(k)) continue;
    for (std::size_t c = 0; c < m.mu[k].dim(); ++c) cols.emplace_back(&m.mu[k], c);
  }
  for (std::size_t k = 1; k < kBlocks; ++k) {
    for (std::size_t c = 0; c < m.filter[k]->mean.dim(); ++c) cols.emplace_back(&m.filter[k]->mean, c);
    cols.emplace_back(&m.filtered_deflator[k], 0);
    for (std::size_t c = 0; c < m.y[k].dim(); ++c) cols.emplace_back(&m.y[k], c);
  }
  const bool with_w0 = scenario.terminal.uses_unobserved && scenario.has_block(0);
  Eigen::MatrixXd vars(static_cast<Eigen::Index>(m.n_paths),
                       static_cast<Eigen::Index>(cols.size() + (with_w0 ? 1 : 0)));
  for (std::size_t p = 0; p < m.n_paths; ++p) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      vars(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = (*cols[i].first)(p, j, cols[i].second);
    }
    if (with_w0) {
      double w = 0.0;
      for (std::size_t s = 0; s < j; ++s) {
        for (std::size_t c = 0; c < bundle.dims[0]; ++c) w += bundle.dW[0](p, s, c);
      }
      vars(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(cols.size())) = w;
    }
  }
  return vars;
}

}  // namespace detail

// Backward least-squares Monte Carlo for
//   dy = [r y + sum_k b^k . z^k + I_1 + I_2] dt + sum_k z^k dW^k,  y(T) = xi:
//   E_j  = Proj_j[y_{j+1}]
//   z_j  = Proj_j[(y_{j+1} - E_j) dW_j] / dt
//   y_j  = (E_j - (b_j . z_j + I_j) dt) / (1 + r dt)
// y(0) is the mean of y_0; its error bar comes from the pathwise roll-back
// of the BSDE along each path with the regressed z.
inline BsdeSolution lsmc_bsde_solve(const GameScenario& scenario, const MarketState& m,
                                    const PathBundle& bundle, const StrategyProcess& first,
                                    const StrategyProcess& second,
                                    LsmcBasis basis = LsmcBasis::quadratic) {
  const TimeGrid& grid = m.grid;
  const std::size_t n_paths = m.n_paths;
  detail::require_admissible(first, grid, n_paths, "lsmc_bsde_solve");
  detail::require_admissible(second, grid, n_paths, "lsmc_bsde_solve");
  if (bundle.n_paths != n_paths) throw InvalidArgument("lsmc_bsde_solve: bundle/market mismatch");

  const double dt = grid.dt();
  const auto np = static_cast<Eigen::Index>(n_paths);
  std::vector<std::pair<std::size_t, std::size_t>> noise;  // (block, component)
  for (std::size_t k = 0; k < kBlocks; ++k) {
    for (std::size_t c = 0; c < bundle.dims[k]; ++c) noise.emplace_back(k, c);
  }

  BsdeSolution sol;
  sol.y = RealPath(n_paths, grid.n_nodes(), 1);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (bundle.dims[k] > 0) sol.z[k] = RealPath(n_paths, grid.n_nodes(), bundle.dims[k]);
  }
  std::vector<double> rollback(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    sol.y(p, grid.n_steps()) = m.xi[p];
    rollback[p] = m.xi[p];
  }

  Eigen::VectorXd next(np);
  Eigen::MatrixXd martingale(np, static_cast<Eigen::Index>(noise.size()));
  for (std::size_t jj = grid.n_steps(); jj-- > 0;) {
    const Eigen::MatrixXd features = drop_degenerate_columns(
        polynomial_features(detail::lsmc_state(scenario, m, bundle, jj), static_cast<int>(basis)));
    const LinearProjector proj(features);
    sol.max_condition = std::max(sol.max_condition, proj.condition_number());

    for (std::size_t p = 0; p < n_paths; ++p) next(static_cast<Eigen::Index>(p)) = sol.y(p, jj + 1);
    const Eigen::VectorXd expected = proj.fit(next).fitted.col(0);
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto ip = static_cast<Eigen::Index>(p);
      for (std::size_t q = 0; q < noise.size(); ++q) {
        martingale(ip, static_cast<Eigen::Index>(q)) =
            (next(ip) - expected(ip)) * bundle.dW[noise[q].first](p, jj, noise[q].second);
      }
    }
    const Eigen::MatrixXd zfit = proj.fit(martingale).fitted / dt;

    const double r = scenario.rate;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto ip = static_cast<Eigen::Index>(p);
      double bz = 0.0;
      double z_dw = 0.0;
      for (std::size_t q = 0; q < noise.size(); ++q) {
        const auto [k, c] = noise[q];
        const double zv = zfit(ip, static_cast<Eigen::Index>(q));
        sol.z[k](p, jj, c) = zv;
        bz += m.b[k](p, jj, c) * zv;
        z_dw += zv * bundle.dW[k](p, jj, c);
      }
      const double drift = (bz + first(p, jj) + second(p, jj)) * dt;
      sol.y(p, jj) = (expected(ip) - drift) / (1.0 + r * dt);
      rollback[p] = (rollback[p] - z_dw - drift) / (1.0 + r * dt);
    }
  }

  std::vector<double> y0(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) y0[p] = sol.y(p, 0);
  sol.y0.value = estimate_mean(y0).mean;
  sol.y0.std_error = estimate_mean(rollback).std_error;
  sol.y0.samples = std::move(y0);
  return sol;
}

}  // namespace fbsde
