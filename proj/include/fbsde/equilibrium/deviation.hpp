#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fbsde/core/statistics.hpp"
#include "fbsde/equilibrium/adaptedness.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/game/cost.hpp"
#include "fbsde/game/wealth.hpp"

namespace fbsde {

// A perturbation direction v for one player. `direction` must only read the
// player's own observations; nash_deviation_test audits this.
struct DeviationFamily {
  std::string name;
  bool deterministic = false;
  std::function<RealPath(const MarketState&, int player)> direction;
};

inline DeviationFamily constant_deviation() {
  return {"constant", true, [](const MarketState& m, int) {
            return RealPath(m.n_paths, m.grid.n_nodes(), 1, 1.0);
          }};
}

inline DeviationFamily exp_decay_deviation() {
  return {"exp_decay", true, [](const MarketState& m, int) {
            RealPath v(m.n_paths, m.grid.n_nodes(), 1);
            for (std::size_t p = 0; p < m.n_paths; ++p) {
              for (std::size_t j = 0; j < m.grid.n_nodes(); ++j) v(p, j) = std::exp(-m.grid.time(j));
            }
            return v;
          }};
}

// v(t) = tanh(Y^i_1(t)): bounded and genuinely observation-dependent.
inline DeviationFamily observation_tanh_deviation() {
  return {"observation_tanh", false, [](const MarketState& m, int player) {
            const RealPath& y = m.y[static_cast<std::size_t>(player)];
            RealPath v(m.n_paths, m.grid.n_nodes(), 1);
            for (std::size_t p = 0; p < m.n_paths; ++p) {
              for (std::size_t j = 0; j < m.grid.n_nodes(); ++j) {
                v(p, j) = std::tanh(ObservationView(y, p, j, m.grid).current());
              }
            }
            return v;
          }};
}

inline std::vector<DeviationFamily> default_deviation_families() {
  return {constant_deviation(), exp_decay_deviation(), observation_tanh_deviation()};
}

struct DeviationOptions {
  std::vector<double> eps_fractions{0.05, 0.1, 0.2};  // mirrored around 0
  double scale = 0.0;                  // <= 0: mean candidate injection of the player
  double sigma_multiple = 3.0;
  std::uint64_t independent_seed = 0xD1CEB0A7ull;
  bool audit = true;
};

struct DeviationReport {
  int player = 1;
  std::string family;
  std::string mode;
  std::vector<double> eps;
  std::vector<double> delta_j;
  std::vector<double> delta_stderr;
  double fit_constant = 0.0;
  double fit_linear = 0.0;
  double fit_quadratic = 0.0;
  double linear_stderr = 0.0;
  double quadratic_stderr = 0.0;
  double eps_star = 0.0;
  double grid_spacing = 0.0;
  double expected_quadratic = 0.0;  // independent E int L e^{-beta t} v^2 dt
  double expected_quadratic_stderr = 0.0;
  double expected_linear = 0.0;     // cross-player tests only
  std::size_t dropped_eps = 0;
  bool sign_ok = false;
  bool minimum_ok = false;
  bool curvature_ok = false;
  bool pass = false;
};

using PathCost =
    std::function<std::vector<double>(const StrategyProcess&, const StrategyProcess&)>;

// Per-path J_i = int L_i e^{-beta t} I_i^2 dt + M_i y(0)-contribution.
inline PathCost nash_path_cost(const GameRun& run, int player) {
  require_player(player);
  return [&run, player](const StrategyProcess& a, const StrategyProcess& b) {
    const auto& cost = run.scenario.cost;
    const WealthEstimate y0 = wealth_y0(run.market, a, b);
    auto running = running_cost_samples(player == 1 ? a : b, cost.L(player), cost.beta, run.market.grid);
    for (std::size_t p = 0; p < running.size(); ++p) running[p] += cost.M(player) * y0.samples[p];
    return running;
  };
}

// Zero-sum toy: J = int e^{-beta t}(L1 I1^2 - L2 I2^2) dt + M1 y1(0) - M2 y2(0),
// with y_i(0) the start-up capital attributable to manager i's injections
// alone. Player 1 minimises J, player 2 maximises it; the closed-form
// candidate pair is its saddle point.
inline PathCost zero_sum_path_cost(const GameRun& run, double sign = 1.0) {
  return [&run, sign](const StrategyProcess& a, const StrategyProcess& b) {
    const auto& cost = run.scenario.cost;
    const auto& m = run.market;
    const auto zero = zero_strategy(2, m.n_paths, m.grid);
    const auto zero1 = zero_strategy(1, m.n_paths, m.grid);
    const auto y1 = wealth_y0(m, a, zero);
    const auto y2 = wealth_y0(m, zero1, b);
    const auto run1 = running_cost_samples(a, cost.L1, cost.beta, m.grid);
    const auto run2 = running_cost_samples(b, cost.L2, cost.beta, m.grid);
    std::vector<double> out(m.n_paths);
    for (std::size_t p = 0; p < m.n_paths; ++p) {
      out[p] = sign * (run1[p] - run2[p] + cost.M1 * y1.samples[p] - cost.M2 * y2.samples[p]);
    }
    return out;
  };
}

namespace detail {

inline double mean_injection(const StrategyProcess& s) {
  return pairwise_sum(s.values.raw()) / static_cast<double>(s.values.raw().size());
}

// Symmetric eps grid, dropping +-pairs that would push base + eps v below 0.
inline std::vector<double> admissible_eps(const StrategyProcess& base, const RealPath& v,
                                          const std::vector<double>& magnitudes,
                                          std::size_t& dropped) {
  auto ok = [&](double eps) {
    const auto b = base.values.raw();
    const auto d = v.raw();
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] + eps * d[i] < 0.0) return false;
    }
    return true;
  };
  std::vector<double> eps{0.0};
  dropped = 0;
  for (double e : magnitudes) {
    if (ok(e) && ok(-e)) {
      eps.push_back(e);
      eps.push_back(-e);
    } else {
      dropped += 2;
    }
  }
  std::sort(eps.begin(), eps.end());
  if (eps.size() < 3) {
    throw InvalidArgument("deviation test: no admissible nonzero eps keeps injections nonnegative");
  }
  return eps;
}

inline void require_direction_adapted(const GameRun& run, int player, const DeviationFamily& fam) {
  StrategyBuilder b = [&](const MarketState& m) {
    StrategyProcess s;
    s.player = player;
    s.values = fam.direction(m, player);
    return s;
  };
  const auto audit = audit_adaptedness(run, player, b);
  if (!audit.passed) {
    throw ContractViolation("deviation family '" + fam.name + "' is not adapted to player " +
                            std::to_string(player) + "'s observations (" +
                            std::to_string(audit.mismatches) + " mismatching values)");
  }
}

// Evaluates Delta J(eps) with common random numbers and fits a + g eps + c eps^2
// both to the means and path by path (for standard errors).
inline void sweep(const PathCost& cost, const StrategyProcess& base1, const StrategyProcess& base2,
                  int perturbed_player, const RealPath& v, DeviationReport& rep) {
  const auto reference = cost(base1, base2);
  const std::size_t n = reference.size();
  const auto m = static_cast<Eigen::Index>(rep.eps.size());
  Eigen::MatrixXd per_path(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const double eps = rep.eps[static_cast<std::size_t>(e)];
    const auto shifted = perturbed_player == 1 ? cost(perturbed(base1, eps, v), base2)
                                               : cost(base1, perturbed(base2, eps, v));
    std::vector<double> diff(n);
    for (std::size_t p = 0; p < n; ++p) {
      diff[p] = shifted[p] - reference[p];
      per_path(static_cast<Eigen::Index>(p), e) = diff[p];
    }
    const auto est = estimate_mean(diff);
    rep.delta_j.push_back(est.mean);
    rep.delta_stderr.push_back(est.std_error);
  }
  Eigen::MatrixXd design(m, 3);
  for (Eigen::Index e = 0; e < m; ++e) {
    const double eps = rep.eps[static_cast<std::size_t>(e)];
    design(e, 0) = 1.0;
    design(e, 1) = eps;
    design(e, 2) = eps * eps;
  }
  const Eigen::MatrixXd solve = (design.transpose() * design).ldlt().solve(design.transpose());
  const Eigen::MatrixXd coef = per_path * solve.transpose();  // n x 3
  std::array<std::vector<double>, 3> cols;
  for (int c = 0; c < 3; ++c) {
    cols[c].resize(n);
    for (std::size_t p = 0; p < n; ++p) cols[c][p] = coef(static_cast<Eigen::Index>(p), c);
  }
  const auto a = estimate_mean(cols[0]);
  const auto g = estimate_mean(cols[1]);
  const auto q = estimate_mean(cols[2]);
  rep.fit_constant = a.mean;
  rep.fit_linear = g.mean;
  rep.fit_quadratic = q.mean;
  rep.linear_stderr = g.std_error;
  rep.quadratic_stderr = q.std_error;
  rep.eps_star = rep.fit_quadratic != 0.0 ? -rep.fit_linear / (2.0 * rep.fit_quadratic) : INFINITY;
}

// E int L e^{-beta t} v^2 dt by direct quadrature. Random directions are
// evaluated on an independent Monte Carlo sample.
inline MeanEstimate independent_curvature(const GameRun& run, int player,
                                          const DeviationFamily& fam, std::uint64_t seed) {
  const auto& cost = run.scenario.cost;
  const TimeGrid& grid = run.scenario.grid;
  auto integrate = [&](const RealPath& v, std::size_t paths) {
    std::vector<double> out(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < grid.n_steps(); ++j) {
        acc += cost.L(player) * std::exp(-cost.beta * grid.time(j)) * v(p, j) * v(p, j) * grid.dt();
      }
      out[p] = acc;
    }
    return out;
  };
  if (fam.deterministic) {
    const auto once = integrate(fam.direction(run.market, player), 1);
    return {once[0], 0.0, 1};
  }
  const PathBundle fresh =
      sample_brownian_bundle(grid, run.scenario.dims(), run.scenario.n_paths, seed ^ run.scenario.seed);
  const MarketState fresh_market = simulate_market(run.scenario, fresh);
  const auto samples = integrate(fam.direction(fresh_market, player), fresh_market.n_paths);
  return estimate_mean(samples);
}

}  // namespace detail

// Unilateral deviation test of player i at the candidate pair:
// Delta J_i(eps) = J_i(I_i + eps v, I_j) - J_i(I_i, I_j).
inline DeviationReport nash_deviation_test(const GameRun& run, int player,
                                           const DeviationFamily& fam,
                                           const DeviationOptions& opt = {}) {
  require_player(player);
  if (opt.audit) detail::require_direction_adapted(run, player, fam);
  const StrategyProcess& own = run.candidate(player);
  const RealPath v = fam.direction(run.market, player);
  const double scale = opt.scale > 0.0 ? opt.scale : detail::mean_injection(own);

  DeviationReport rep;
  rep.player = player;
  rep.family = fam.name;
  rep.mode = "own";
  std::vector<double> magnitudes;
  for (double f : opt.eps_fractions) magnitudes.push_back(f * scale);
  rep.eps = detail::admissible_eps(own, v, magnitudes, rep.dropped_eps);
  rep.grid_spacing = *std::min_element(magnitudes.begin(), magnitudes.end());
  detail::sweep(nash_path_cost(run, player), run.candidate1, run.candidate2, player, v, rep);

  const auto expected = detail::independent_curvature(run, player, fam, opt.independent_seed);
  rep.expected_quadratic = expected.mean;
  rep.expected_quadratic_stderr = expected.std_error;

  rep.sign_ok = true;
  for (std::size_t e = 0; e < rep.eps.size(); ++e) {
    if (rep.delta_j[e] < -opt.sigma_multiple * rep.delta_stderr[e]) rep.sign_ok = false;
  }
  rep.minimum_ok = std::abs(rep.eps_star) <= rep.grid_spacing;
  const double tol = opt.sigma_multiple * std::hypot(rep.quadratic_stderr, rep.expected_quadratic_stderr) +
                     1e-9 * std::abs(rep.expected_quadratic);
  rep.curvature_ok = std::abs(rep.fit_quadratic - rep.expected_quadratic) <= tol;
  rep.pass = rep.sign_ok && rep.minimum_ok;
  return rep;
}

// Player `cost_player`'s cost while the other manager deviates. The change
// is linear: Delta J(eps) = -eps M E int D v ds.
inline DeviationReport cross_deviation_test(const GameRun& run, int cost_player,
                                            const DeviationFamily& fam,
                                            const DeviationOptions& opt = {}) {
  require_player(cost_player);
  const int mover = 3 - cost_player;
  if (opt.audit) detail::require_direction_adapted(run, mover, fam);
  const StrategyProcess& moving = run.candidate(mover);
  const RealPath v = fam.direction(run.market, mover);
  const double scale = opt.scale > 0.0 ? opt.scale : detail::mean_injection(moving);

  DeviationReport rep;
  rep.player = cost_player;
  rep.family = fam.name;
  rep.mode = "cross";
  std::vector<double> magnitudes;
  for (double f : opt.eps_fractions) magnitudes.push_back(f * scale);
  rep.eps = detail::admissible_eps(moving, v, magnitudes, rep.dropped_eps);
  rep.grid_spacing = *std::min_element(magnitudes.begin(), magnitudes.end());
  detail::sweep(nash_path_cost(run, cost_player), run.candidate1, run.candidate2, mover, v, rep);

  const auto& m = run.market;
  std::vector<double> slope(m.n_paths);
  for (std::size_t p = 0; p < m.n_paths; ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.grid.n_steps(); ++j) acc += m.deflator(p, j) * v(p, j);
    slope[p] = -run.scenario.cost.M(cost_player) * acc * m.grid.dt();
  }
  rep.expected_linear = estimate_mean(slope).mean;
  rep.sign_ok = true;
  rep.curvature_ok = std::abs(rep.fit_quadratic) <= 1e-9 * (1.0 + std::abs(rep.fit_linear));
  rep.pass = std::abs(rep.fit_linear - rep.expected_linear) <=
                 1e-9 * (1.0 + std::abs(rep.expected_linear)) &&
             rep.curvature_ok;
  return rep;
}

struct SaddleReport {
  DeviationReport minimizer;  // player 1 deviations: Delta J >= -k se
  DeviationReport maximizer;  // player 2 deviations: Delta J <= +k se
  bool pass = false;
};

// Saddle-point check of the zero-sum game J = J_1 = -J_2 at the candidate pair.
// sign = -1 flips the convention (player 1 maximises).
inline SaddleReport saddle_check(const GameRun& run, const DeviationFamily& fam,
                                 const DeviationOptions& opt = {}, double sign = 1.0) {
  SaddleReport out;
  const PathCost cost = zero_sum_path_cost(run, sign);
  for (int player : {1, 2}) {
    if (opt.audit) detail::require_direction_adapted(run, player, fam);
    const StrategyProcess& own = run.candidate(player);
    const RealPath v = fam.direction(run.market, player);
    const double scale = opt.scale > 0.0 ? opt.scale : detail::mean_injection(own);
    DeviationReport rep;
    rep.player = player;
    rep.family = fam.name;
    rep.mode = player == 1 ? "zero_sum_min" : "zero_sum_max";
    std::vector<double> magnitudes;
    for (double f : opt.eps_fractions) magnitudes.push_back(f * scale);
    rep.eps = detail::admissible_eps(own, v, magnitudes, rep.dropped_eps);
    rep.grid_spacing = *std::min_element(magnitudes.begin(), magnitudes.end());
    detail::sweep(cost, run.candidate1, run.candidate2, player, v, rep);
    rep.sign_ok = true;
    for (std::size_t e = 0; e < rep.eps.size(); ++e) {
      const double bound = opt.sigma_multiple * rep.delta_stderr[e];
      const bool ok = player == 1 ? rep.delta_j[e] >= -bound : rep.delta_j[e] <= bound;
      if (!ok) rep.sign_ok = false;
    }
    rep.minimum_ok = std::abs(rep.eps_star) <= rep.grid_spacing;
    rep.pass = rep.sign_ok && rep.minimum_ok;
    (player == 1 ? out.minimizer : out.maximizer) = std::move(rep);
  }
  out.pass = out.minimizer.pass && out.maximizer.pass;
  return out;
}

}  // namespace fbsde
