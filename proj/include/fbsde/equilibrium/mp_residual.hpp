#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fbsde/core/statistics.hpp"
#include "fbsde/equilibrium/conditional.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/game/market.hpp"

namespace fbsde {

// Default O(dt) allowance for the Euler filter bias in the regression
// channel, in units of M_i * dt per standardised feature moment.
inline constexpr double kFilterBiasConstant = 1.0;
inline constexpr double kMpSigmaMultiple = 5.0;

struct ProbeResidual {
  double t = 0.0;
  std::size_t node = 0;
  // max over paths of |p_hat_i + 2 L_i e^{-beta t} I_i|
  double closed_form = 0.0;
  double closed_form_mean = 0.0;  // signed path average of the same residual
  // max over standardised features f of |mean((p_i + 2 L_i e^{-beta t} I_i) f)|
  double regression = 0.0;
  double regression_stderr = 0.0;  // standard error of that moment
  double discretization_bound = 0.0;
  // RMS distance between the regression estimate of E[p_i | F^i] and p_hat_i
  double projection_gap = 0.0;
  bool closed_form_pass = false;
  bool regression_pass = false;
};

struct MPResidualReport {
  int player = 1;
  std::vector<ProbeResidual> probes;
  bool pass = false;
};

// Evenly spaced probe nodes T/5, 2T/5, ..., T.
inline std::vector<std::size_t> default_probe_nodes(const TimeGrid& grid, std::size_t count = 5) {
  std::vector<std::size_t> nodes;
  for (std::size_t i = 1; i <= count; ++i) {
    nodes.push_back(grid.nearest_step(grid.horizon() * static_cast<double>(i) /
                                      static_cast<double>(count)));
  }
  return nodes;
}

// Stationarity E[p_i + 2 L_i e^{-beta t} I_i | F_t^i] = 0 checked two ways:
// exactly against the filtered adjoint, and statistically against the raw
// adjoint p_i = -M_i D through moments with observation features.
inline MPResidualReport mp_residual(const GameScenario& scenario, const MarketState& m,
                                    const StrategyProcess& strategy, int player,
                                    const std::vector<std::size_t>& probe_nodes,
                                    double bias_constant = kFilterBiasConstant) {
  require_player(player);
  const double weight_l = scenario.cost.L(player);
  const double weight_m = scenario.cost.M(player);
  const double beta = scenario.cost.beta;
  const auto k = static_cast<std::size_t>(player);
  const RealPath p_hat = filtered_adjoint_of(m, player, weight_m);
  const std::size_t n = m.n_paths;

  MPResidualReport rep;
  rep.player = player;
  rep.pass = true;
  for (std::size_t node : probe_nodes) {
    if (node == 0 || node > m.grid.n_steps()) {
      throw InvalidArgument("mp_residual: probe nodes must lie in (0, T]");
    }
    ProbeResidual pr;
    pr.node = node;
    pr.t = m.grid.time(node);
    const double weight = 2.0 * weight_l * std::exp(-beta * pr.t);

    std::vector<double> gradient(n);
    std::vector<double> raw_p(n);
    std::vector<double> hat_p(n);
    std::vector<double> residual(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double stationarity = weight * strategy(p, node);
      residual[p] = p_hat(p, node) + stationarity;
      pr.closed_form = std::max(pr.closed_form, std::abs(residual[p]));
      raw_p[p] = -weight_m * m.deflator(p, node);
      hat_p[p] = p_hat(p, node);
      gradient[p] = raw_p[p] + stationarity;
    }
    pr.closed_form_mean = pairwise_sum(residual) / static_cast<double>(n);
    pr.closed_form_pass = pr.closed_form <= 1e-12 * (1.0 + weight_m);

    Eigen::MatrixXd features = observation_features(m.y[k], node, m.grid);
    for (Eigen::Index c = 1; c < features.cols(); ++c) {
      const double mean = features.col(c).mean();
      features.col(c).array() -= mean;
      const double sd = std::sqrt(features.col(c).squaredNorm() / static_cast<double>(n));
      if (sd > 0.0) features.col(c) /= sd;
    }
    pr.discretization_bound = bias_constant * weight_m * m.grid.dt();
    pr.regression_pass = true;
    std::vector<double> moment(n);
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      for (std::size_t p = 0; p < n; ++p) moment[p] = gradient[p] * features(static_cast<Eigen::Index>(p), c);
      const auto e = estimate_mean(moment);
      if (std::abs(e.mean) > pr.regression) {
        pr.regression = std::abs(e.mean);
        pr.regression_stderr = e.std_error;
      }
      if (std::abs(e.mean) > kMpSigmaMultiple * (e.std_error + pr.discretization_bound)) {
        pr.regression_pass = false;
      }
    }

    const auto fitted = conditional_expectation(raw_p, features).fitted;
    double gap = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = fitted(static_cast<Eigen::Index>(p)) - hat_p[p];
      gap += d * d;
    }
    pr.projection_gap = std::sqrt(gap / static_cast<double>(n));

    rep.pass = rep.pass && pr.closed_form_pass && pr.regression_pass;
    rep.probes.push_back(pr);
  }
  return rep;
}

inline MPResidualReport mp_residual(const GameRun& run, int player) {
  return mp_residual(run.scenario, run.market, run.candidate(player), player,
                     default_probe_nodes(run.market.grid));
}

}  // namespace fbsde
