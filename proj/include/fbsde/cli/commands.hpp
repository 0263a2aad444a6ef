#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fbsde/cli/csv.hpp"
#include "fbsde/cli/scenario_file.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/equilibrium/deviation.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/equilibrium/mp_residual.hpp"
#include "fbsde/filter/consistency.hpp"
#include "fbsde/filter/riccati.hpp"
#include "fbsde/game/cost.hpp"
#include "fbsde/game/wealth.hpp"

namespace fbsde::cli {

inline constexpr const char* kToolName = "fbsde-game-lab";
inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitInputError = 2 };

struct RunOptions {
  std::string command;
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  bool zero_sum = false;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CommandResult {
  std::vector<Check> checks;
  std::vector<std::string> outputs;

  void check(std::string name, bool pass, std::string detail = {}) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

namespace detail {

inline std::string entry_name(const char* prefix, Eigen::Index i, Eigen::Index j) {
  return std::string(prefix) + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

inline void emit(CommandResult& res, const std::filesystem::path& dir, const std::string& name,
                 const CsvTable& table) {
  table.write((dir / name).string());
  res.outputs.push_back(name);
}

inline std::string number(double v) { return csv_number(v); }

}  // namespace detail

// Riccati covariance of each player's block: t, P entries, min eigenvalue.
inline CommandResult cmd_riccati(const ScenarioFile& f, const std::filesystem::path& dir) {
  CommandResult res;
  const GameScenario& g = f.game;
  for (std::size_t k = 1; k < kBlocks; ++k) {
    const auto n = static_cast<Eigen::Index>(g.dims()[k]);
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) header.push_back(detail::entry_name("P", i, j));
    }
    header.push_back("min_eigenvalue");
    CsvTable table(header);
    const std::string name = "riccati_block" + std::to_string(k);
    try {
      const CovariancePath cov = solve_riccati(g.drift(k), g.observation(k), g.grid);
      double asym = 0.0;
      for (std::size_t node = 0; node < cov.size(); ++node) {
        std::vector<std::string> cells{csv_number(g.grid.time(node))};
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) cells.push_back(csv_number(cov[node](i, j)));
        }
        asym = std::max(asym, (cov[node] - cov[node].transpose()).cwiseAbs().maxCoeff());
        cells.push_back(csv_number(cov.min_eigenvalue[node]));
        table.add_cells(std::move(cells));
      }
      const double min_eig = *std::min_element(cov.min_eigenvalue.begin(), cov.min_eigenvalue.end());
      res.check(name + "_psd", min_eig >= -kPsdTolerance, "min eigenvalue " + detail::number(min_eig));
      res.check(name + "_symmetric", asym <= 1e-10, "max asymmetry " + detail::number(asym));
    } catch (const NumericalFailure& e) {
      res.check(name + "_psd", false, e.what());
    }
    detail::emit(res, dir, name + ".csv", table);
  }
  return res;
}

// Filter error covariance against Riccati P at five probe times, plus
// innovation statistics, for both players.
inline CommandResult cmd_filter_check(const ScenarioFile& f, const std::filesystem::path& dir) {
  CommandResult res;
  const GameScenario& g = f.game;
  const PathBundle bundle = sample_brownian_bundle(g.grid, g.dims(), g.n_paths, g.seed);
  const MarketState m = simulate_market(g, bundle);
  const auto nodes = default_probe_nodes(g.grid);
  for (std::size_t k = 1; k < kBlocks; ++k) {
    const FilterOutput& filter = *m.filter[k];
    const auto fc = filter_consistency(m.mu[k], filter, filter.covariance, g.grid, nodes, 5.0);
    const std::size_t d = m.mu[k].dim();
    std::vector<std::string> header{"t", "node"};
    for (std::size_t i = 0; i < d; ++i) header.push_back("error_mean_" + std::to_string(i + 1));
    for (const char* what : {"empirical", "stderr", "riccati", "z"}) {
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          header.push_back(detail::entry_name(what, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
      }
    }
    CsvTable table(header);
    for (const auto& probe : fc.probes) {
      std::vector<std::string> cells{csv_number(probe.t), std::to_string(probe.node)};
      for (double v : probe.error_mean) cells.push_back(csv_number(v));
      for (const auto& e : probe.entries) cells.push_back(csv_number(e.empirical));
      for (const auto& e : probe.entries) cells.push_back(csv_number(e.std_error));
      for (const auto& e : probe.entries) cells.push_back(csv_number(e.riccati));
      for (const auto& e : probe.entries) cells.push_back(csv_number(e.z));
      table.add_cells(std::move(cells));
    }
    const std::string name = "filter_block" + std::to_string(k);
    detail::emit(res, dir, name + ".csv", table);
    res.check(name + "_consistency", fc.pass, "max |z| " + detail::number(fc.max_abs_z) + " (limit 5)");
    const auto inn = innovation_stats(filter.innovation, g.grid.dt());
    res.check(name + "_innovation", inn.pass,
              "mean " + detail::number(inn.mean) + " (bound " + detail::number(inn.mean_bound) +
                  "), variance " + detail::number(inn.variance) + " vs dt " +
                  detail::number(g.grid.dt()) + " (bound " + detail::number(inn.variance_bound) + ")");
  }
  return res;
}

// Builds the game and applies the configured candidate scaling.
inline GameRun prepare_configured_game(const ScenarioFile& f) {
  GameRun run = prepare_game(f.game);
  if (f.candidate_scale1 != 1.0) run.candidate1 = scaled(run.candidate1, f.candidate_scale1);
  if (f.candidate_scale2 != 1.0) run.candidate2 = scaled(run.candidate2, f.candidate_scale2);
  return run;
}

namespace detail {

inline CsvTable candidate_summary(const GameRun& run) {
  CsvTable table({"t", "I1_mean", "I1_std", "I1_min", "I1_max", "I2_mean", "I2_std", "I2_min", "I2_max"});
  const auto& grid = run.market.grid;
  std::vector<double> col(run.market.n_paths);
  for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
    std::vector<std::string> cells{csv_number(grid.time(j))};
    for (int player : {1, 2}) {
      const auto& s = run.candidate(player);
      for (std::size_t p = 0; p < col.size(); ++p) col[p] = s(p, j);
      const auto e = estimate_mean(col);
      const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      cells.push_back(csv_number(e.mean));
      cells.push_back(csv_number(std::sqrt(sample_variance(col))));
      cells.push_back(csv_number(*lo));
      cells.push_back(csv_number(*hi));
    }
    table.add_cells(std::move(cells));
  }
  return table;
}

inline void add_deviation_rows(CsvTable& points, CsvTable& fits, const DeviationReport& r) {
  for (std::size_t e = 0; e < r.eps.size(); ++e) {
    points.add(r.player, r.family, r.mode, r.eps[e], r.delta_j[e], r.delta_stderr[e]);
  }
  fits.add(r.player, r.family, r.mode, r.fit_constant, r.fit_linear, r.linear_stderr, r.fit_quadratic,
           r.quadratic_stderr, r.expected_quadratic, r.expected_quadratic_stderr, r.eps_star,
           r.grid_spacing, r.dropped_eps, r.sign_ok, r.minimum_ok, r.curvature_ok, r.pass);
}

}  // namespace detail

// Candidate summary, costs, maximum-principle residuals and deviation tests
// (or the zero-sum saddle check).
inline CommandResult cmd_equilibrium(const ScenarioFile& f, const std::filesystem::path& dir,
                                     bool zero_sum) {
  CommandResult res;
  const GameRun run = prepare_configured_game(f);
  const auto& g = run.scenario;
  detail::emit(res, dir, "candidate_summary.csv", detail::candidate_summary(run));

  const WealthEstimate y0 = wealth_y0(run.market, run.candidate1, run.candidate2);
  CsvTable costs({"game", "player", "J", "stderr", "running_part", "initial_part", "y0", "y0_stderr"});
  for (int player : {1, 2}) {
    const auto c = cost_functional(g.cost, player, g.grid, run.candidate(player), y0);
    costs.add("nash", player, c.mean, c.std_error, c.running_part, c.initial_part, y0.value, y0.std_error);
  }
  if (zero_sum) {
    const auto zs = estimate_mean(zero_sum_path_cost(run)(run.candidate1, run.candidate2));
    costs.add("zero_sum", 0, zs.mean, zs.std_error, NAN, NAN, NAN, NAN);
  }
  detail::emit(res, dir, "costs.csv", costs);

  CsvTable mp({"player", "t", "node", "closed_form_max", "closed_form_mean", "regression", "regression_stderr",
               "discretization_bound", "projection_gap", "closed_form_pass", "regression_pass"});
  for (int player : {1, 2}) {
    const auto rep = mp_residual(run, player);
    for (const auto& pr : rep.probes) {
      mp.add(player, pr.t, pr.node, pr.closed_form, pr.closed_form_mean, pr.regression, pr.regression_stderr,
             pr.discretization_bound, pr.projection_gap, pr.closed_form_pass, pr.regression_pass);
    }
    double worst = 0.0;
    for (const auto& pr : rep.probes) worst = std::max(worst, pr.closed_form);
    res.check("mp_residual_player" + std::to_string(player), rep.pass,
              "max closed-form residual " + detail::number(worst));
  }
  detail::emit(res, dir, "mp_residual.csv", mp);

  CsvTable points({"player", "family", "mode", "eps", "delta_J", "stderr"});
  CsvTable fits({"player", "family", "mode", "fit_constant", "fit_linear", "linear_stderr", "fit_quadratic",
                 "quadratic_stderr", "expected_quadratic", "expected_quadratic_stderr", "eps_star",
                 "eps_spacing", "dropped_eps", "sign_ok", "minimum_ok", "curvature_ok", "pass"});
  for (const auto& fam : default_deviation_families()) {
    if (zero_sum) {
      const auto s = saddle_check(run, fam);
      detail::add_deviation_rows(points, fits, s.minimizer);
      detail::add_deviation_rows(points, fits, s.maximizer);
      res.check("saddle_" + fam.name, s.pass,
                "eps* " + detail::number(s.minimizer.eps_star) + " / " + detail::number(s.maximizer.eps_star));
    } else {
      for (int player : {1, 2}) {
        const auto r = nash_deviation_test(run, player, fam);
        detail::add_deviation_rows(points, fits, r);
        res.check("deviation_player" + std::to_string(player) + "_" + fam.name, r.pass,
                  "eps* " + detail::number(r.eps_star) + ", spacing " + detail::number(r.grid_spacing));
        res.check("curvature_player" + std::to_string(player) + "_" + fam.name, r.curvature_ok,
                  "fit " + detail::number(r.fit_quadratic) + " +- " + detail::number(r.quadratic_stderr) +
                      " vs " + detail::number(r.expected_quadratic));
      }
    }
  }
  detail::emit(res, dir, "deviations.csv", points);
  detail::emit(res, dir, "deviation_fits.csv", fits);
  return res;
}

// Start-up capital two ways: deflator Monte Carlo and backward LSMC.
inline CommandResult cmd_bsde_xcheck(const ScenarioFile& f, const std::filesystem::path& dir) {
  CommandResult res;
  const GameRun run = prepare_configured_game(f);
  const WealthEstimate direct = wealth_y0(run.market, run.candidate1, run.candidate2);
  const BsdeSolution lsmc = lsmc_bsde_solve(run.scenario, run.market, run.bundle, run.candidate1,
                                            run.candidate2, f.basis);
  const double gap = std::abs(direct.value - lsmc.y0.value);
  const double combined = std::hypot(direct.std_error, lsmc.y0.std_error);
  const double tolerance = 3.0 * combined + 1e-8;

  CsvTable summary({"estimator", "y0", "stderr", "basis", "max_condition"});
  summary.add("deflator", direct.value, direct.std_error, "-", 1.0);
  summary.add("lsmc", lsmc.y0.value, lsmc.y0.std_error, basis_name(f.basis), lsmc.max_condition);
  detail::emit(res, dir, "bsde_xcheck.csv", summary);

  const auto& grid = run.market.grid;
  std::vector<std::string> header{"t", "y_mean"};
  for (std::size_t k = 0; k < kBlocks; ++k) {
    for (std::size_t c = 0; c < lsmc.z[k].dim(); ++c) {
      header.push_back("z" + std::to_string(k) + "_" + std::to_string(c + 1) + "_mean");
    }
  }
  CsvTable path(header);
  std::vector<double> col(run.market.n_paths);
  for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
    std::vector<std::string> cells{csv_number(grid.time(j))};
    for (std::size_t p = 0; p < col.size(); ++p) col[p] = lsmc.y(p, j);
    cells.push_back(csv_number(estimate_mean(col).mean));
    for (std::size_t k = 0; k < kBlocks; ++k) {
      for (std::size_t c = 0; c < lsmc.z[k].dim(); ++c) {
        for (std::size_t p = 0; p < col.size(); ++p) col[p] = lsmc.z[k](p, j, c);
        cells.push_back(csv_number(estimate_mean(col).mean));
      }
    }
    path.add_cells(std::move(cells));
  }
  detail::emit(res, dir, "bsde_path.csv", path);
  res.check("bsde_agreement", gap <= tolerance,
            "gap " + detail::number(gap) + ", tolerance " + detail::number(tolerance));
  return res;
}

namespace detail {

inline std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Runs one subcommand end to end: scenario, outputs, manifest, exit code.
inline int run_command(const RunOptions& opt, std::ostream& log = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["command"] = opt.command;
  manifest["scenario_file"] = opt.scenario_path;
  manifest["zero_sum"] = opt.zero_sum;
  manifest["started_utc"] = detail::utc_now();
  manifest["threads"] = worker_count();

  const std::filesystem::path dir(opt.out_dir);
  auto finish = [&](int code, const std::string& verdict) {
    manifest["exit_code"] = code;
    manifest["verdict"] = verdict;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / "manifest.json");
    if (out) out << manifest.dump(2) << "\n";
    return code;
  };

  ScenarioFile f;
  try {
    if (opt.command != "riccati" && opt.command != "filter-check" && opt.command != "equilibrium" &&
        opt.command != "bsde-xcheck") {
      throw InvalidArgument("unknown command '" + opt.command + "'");
    }
    if (opt.out_dir.empty()) throw InvalidArgument("--out is required");
    f = load_scenario(opt.scenario_path);
    if (opt.seed) f.game.seed = *opt.seed;
    if (opt.paths) {
      if (*opt.paths == 0) throw InvalidArgument("--paths must be positive");
      f.game.n_paths = *opt.paths;
    }
    std::filesystem::create_directories(dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    manifest["error"] = e.what();
    return finish(kExitInputError, "INPUT_ERROR");
  }

  const std::string resolved = resolved_text(f);
  manifest["resolved_scenario"] = resolved;
  manifest["seed"] = f.game.seed;
  manifest["n_paths"] = f.game.n_paths;
  {
    std::ofstream out(dir / "scenario.resolved.ini");
    out << resolved;
  }

  CommandResult result;
  try {
    if (opt.command == "riccati") {
      result = cmd_riccati(f, dir);
    } else if (opt.command == "filter-check") {
      result = cmd_filter_check(f, dir);
    } else if (opt.command == "equilibrium") {
      result = cmd_equilibrium(f, dir, opt.zero_sum);
    } else {
      result = cmd_bsde_xcheck(f, dir);
    }
  } catch (const NumericalFailure& e) {
    log << "numerical failure: " << e.what() << "\n";
    manifest["error"] = e.what();
    return finish(kExitCheckFailed, "FAIL");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    manifest["error"] = e.what();
    return finish(kExitInputError, "INPUT_ERROR");
  }

  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    log << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  }
  manifest["checks"] = checks;
  manifest["outputs"] = result.outputs;
  const bool ok = result.all_pass();
  log << (ok ? "PASS" : "FAIL") << " " << opt.command << "\n";
  return finish(ok ? kExitPass : kExitCheckFailed, ok ? "PASS" : "FAIL");
}

}  // namespace fbsde::cli
