#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/ito.hpp"
#include "fbsde/equilibrium/adaptedness.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/game/cost.hpp"
#include "fbsde/game/hamiltonian.hpp"
#include "fbsde/game/market.hpp"
#include "fbsde/game/strategy.hpp"
#include "fbsde/game/wealth.hpp"
#include "fixtures.hpp"

using namespace fbsde;

TEST(Deflator, NoRateNoDriftIsOne) {
  const TimeGrid g(1.0, 8);
  const auto bundle = sample_brownian_bundle(g, {1, 1, 1}, 4, 1);
  std::array<RealPath, kBlocks> b;
  for (auto& x : b) x = RealPath(4, 9, 1);
  const RealPath d = deflator(g, constant_rate(0.0), b, bundle.dW);
  for (double v : d.raw()) EXPECT_EQ(v, 1.0);
}

TEST(Deflator, ConstantRateDiscounts) {
  const TimeGrid g(2.0, 8);
  const auto bundle = sample_brownian_bundle(g, {1, 1, 1}, 3, 1);
  std::array<RealPath, kBlocks> b;
  for (auto& x : b) x = RealPath(3, 9, 1);
  const RealPath d = deflator(g, constant_rate(0.05), b, bundle.dW);
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(d(2, k), std::exp(-0.05 * g.time(k)), 1e-15);
}

TEST(Deflator, DiscountedMeanIsOne) {
  const auto s = fixtures::small_default(10000, 128);
  const auto bundle = sample_brownian_bundle(s.grid, s.dims(), s.n_paths, s.seed);
  const MarketState m = simulate_market(s, bundle);
  for (std::size_t k : {26u, 51u, 77u, 102u, 128u}) {
    auto xs = m.deflator.cross_section(k);
    for (double& v : xs) v *= std::exp(s.rate * s.grid.time(k));
    const auto e = estimate_mean(xs);
    EXPECT_LE(std::abs(e.mean - 1.0), 4.0 * e.std_error) << "node " << k;
  }
}

TEST(AdjointP, UnitWeightOnUnitDeflator) {
  const RealPath p = adjoint_p(1.0, RealPath(2, 5, 1, 1.0));
  for (double v : p.raw()) EXPECT_EQ(v, -1.0);
}

TEST(AdjointP, NegativeEverywhereAndEqualToMinusMD) {
  const auto s = fixtures::small_default(500, 64);
  const auto bundle = sample_brownian_bundle(s.grid, s.dims(), s.n_paths, s.seed);
  const MarketState m = simulate_market(s, bundle);
  const RealPath p = adjoint_p(s.cost.M2, m.deflator);
  for (std::size_t i = 0; i < p.raw().size(); ++i) {
    EXPECT_LT(p.raw()[i], 0.0);
    EXPECT_EQ(p.raw()[i], -s.cost.M2 * m.deflator.raw()[i]);
  }
}

TEST(AdjointP, RejectsNonPositiveWeight) {
  EXPECT_THROW(adjoint_p(0.0, RealPath(1, 3, 1, 1.0)), InvalidArgument);
  EXPECT_THROW(adjoint_p(-1.0, RealPath(1, 3, 1, 1.0)), InvalidArgument);
}

TEST(AdjointP, EulerSchemeAgreesToFirstOrderInTheMean) {
  std::vector<double> rms;
  for (std::size_t steps : {32u, 128u}) {
    const auto s = fixtures::frozen_drift(4000, steps);
    const auto bundle = sample_brownian_bundle(s.grid, s.dims(), s.n_paths, 5);
    const MarketState m = simulate_market(s, bundle);
    const RealPath exact = adjoint_p(s.cost.M1, m.deflator);
    const RealPath euler = adjoint_p_euler(s.cost.M1, s.grid, constant_rate(s.rate), m.b, bundle.dW);
    std::vector<double> gap(m.n_paths);
    double sq = 0.0;
    for (std::size_t p = 0; p < gap.size(); ++p) {
      gap[p] = euler(p, steps) - exact(p, steps);
      sq += gap[p] * gap[p];
    }
    const auto e = estimate_mean(gap);
    EXPECT_LE(std::abs(e.mean), s.cost.M1 * s.grid.dt() + 3.0 * e.std_error);
    rms.push_back(std::sqrt(sq / static_cast<double>(gap.size())));
  }
  EXPECT_LT(rms[1], 0.7 * rms[0]);
}

TEST(Candidate, HalfWeightUnitAdjoint) {
  const TimeGrid g(1.0, 4);
  const auto s = candidate_strategy(1, RealPath(3, 5, 1, -1.0), 0.5, 0.0, g);
  for (double v : s.values.raw()) EXPECT_EQ(v, 1.0);
}

TEST(Candidate, ConstantWithoutRateOrDrift) {
  const auto sc = fixtures::deterministic(50);
  const GameRun run = prepare_game(sc);
  for (int player : {1, 2}) {
    const double expected = sc.cost.M(player) / (2.0 * sc.cost.L(player));
    for (double v : run.candidate(player).values.raw()) EXPECT_NEAR(v, expected, 1e-15);
  }
}

TEST(Candidate, NonnegativeOnEveryPath) {
  const GameRun run = prepare_game(fixtures::small_default(2000, 64));
  for (int player : {1, 2}) {
    for (double v : run.candidate(player).values.raw()) EXPECT_GE(v, 0.0);
  }
}

TEST(Candidate, RejectsNonPositiveWeight) {
  EXPECT_THROW(candidate_strategy(1, RealPath(1, 5, 1, -1.0), 0.0, 0.0, TimeGrid(1.0, 4)), InvalidArgument);
  EXPECT_THROW(candidate_strategy(3, RealPath(1, 5, 1, -1.0), 1.0, 0.0, TimeGrid(1.0, 4)), InvalidArgument);
}

TEST(Candidate, DiscountFactorGrowsWithBeta) {
  const TimeGrid g(1.0, 4);
  const auto s = candidate_strategy(2, RealPath(1, 5, 1, -2.0), 1.0, 0.1, g);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_NEAR(s(0, k), std::exp(0.1 * g.time(k)), 1e-15);
}

TEST(Wealth, ConstantClaimNoInjection) {
  const auto sc = fixtures::deterministic(20, 1.75);
  const GameRun run = prepare_game(sc);
  const auto y = wealth_y0(run.market, zero_strategy(1, 20, sc.grid), zero_strategy(2, 20, sc.grid));
  EXPECT_EQ(y.value, 1.75);
  EXPECT_EQ(y.std_error, 0.0);
}

TEST(Wealth, ConstantInjectionsReduceCapitalLinearly) {
  const auto sc = fixtures::deterministic(20, 3.0);
  const GameRun run = prepare_game(sc);
  const auto y = wealth_y0(run.market, constant_strategy(1, 20, sc.grid, 0.4),
                           constant_strategy(2, 20, sc.grid, 0.35));
  EXPECT_NEAR(y.value, 3.0 - 0.75 * sc.grid.horizon(), 1e-13);
}

TEST(Wealth, DiscountingOnly) {
  const TimeGrid g(2.0, 16);
  const RealPath d = [&] {
    RealPath x(3, 17, 1);
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k <= 16; ++k) x(p, k) = std::exp(-0.04 * g.time(k));
    }
    return x;
  }();
  const std::vector<double> xi(3, 2.0);
  const auto y = wealth_y0(g, d, xi, zero_strategy(1, 3, g), zero_strategy(2, 3, g));
  EXPECT_NEAR(y.value, 2.0 * std::exp(-0.04 * 2.0), 1e-15);
}

TEST(Wealth, MoreInjectionMeansLessCapital) {
  const GameRun run = prepare_game(fixtures::small_default(1000, 64));
  const auto base = wealth_y0(run.market, run.candidate1, run.candidate2);
  RealPath bump(1000, 65, 1, 0.01);
  const auto more1 = wealth_y0(run.market, perturbed(run.candidate1, 1.0, bump), run.candidate2);
  const auto more2 = wealth_y0(run.market, run.candidate1, perturbed(run.candidate2, 1.0, bump));
  EXPECT_LT(more1.value, base.value);
  EXPECT_LT(more2.value, base.value);
  for (std::size_t p = 0; p < 1000; ++p) EXPECT_LT(more1.samples[p], base.samples[p]);
}

TEST(Wealth, RejectsFailedAuditAndNegativeInjections) {
  const auto sc = fixtures::deterministic(10);
  const GameRun run = prepare_game(sc);
  StrategyProcess leaky = run.candidate1;
  leaky.audit = AuditStatus::failed;
  EXPECT_THROW(wealth_y0(run.market, leaky, run.candidate2), ContractViolation);
  EXPECT_THROW(wealth_y0(run.market, constant_strategy(1, 10, sc.grid, -0.1), run.candidate2),
               InvalidArgument);
  EXPECT_THROW(wealth_y0(run.market, constant_strategy(1, 11, sc.grid, 0.1), run.candidate2),
               InvalidArgument);
}

TEST(Lsmc, DeterministicCaseIsExact) {
  const auto sc = fixtures::deterministic(200, 5.0);
  const GameRun run = prepare_game(sc);
  const auto sol = lsmc_bsde_solve(sc, run.market, run.bundle, run.candidate1, run.candidate2);
  const double kappa = sc.cost.M1 / (2.0 * sc.cost.L1) + sc.cost.M2 / (2.0 * sc.cost.L2);
  EXPECT_NEAR(sol.y0.value, 5.0 - kappa * sc.grid.horizon(), 1e-8);
  EXPECT_NEAR(wealth_y0(run.market, run.candidate1, run.candidate2).value, 5.0 - kappa, 1e-12);
}

TEST(Lsmc, MartingalePartVanishesForConstantClaimWithoutDrift) {
  const auto sc = fixtures::deterministic(200, 2.0);
  const GameRun run = prepare_game(sc);
  const auto sol = lsmc_bsde_solve(sc, run.market, run.bundle, run.candidate1, run.candidate2);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    for (double v : sol.z[k].raw()) EXPECT_NEAR(v, 0.0, 1e-10);
  }
}

TEST(Lsmc, AgreesWithTheDeflatorOnARandomClaim) {
  GameScenario sc = fixtures::small_default(10000, 64);
  sc.terminal.kind = TerminalClaim::Kind::function;
  sc.terminal.slope = 0.5;
  sc.seed = 7;
  const GameRun run = prepare_game(sc);
  const auto direct = wealth_y0(run.market, run.candidate1, run.candidate2);
  const auto sol = lsmc_bsde_solve(sc, run.market, run.bundle, run.candidate1, run.candidate2);
  const double combined = std::hypot(direct.std_error, sol.y0.std_error);
  EXPECT_LE(std::abs(direct.value - sol.y0.value), 3.0 * combined)
      << direct.value << " vs " << sol.y0.value;
}

TEST(Cost, NoInjectionIsWeightedCapital) {
  const auto sc = fixtures::deterministic(10, 2.0);
  const GameRun run = prepare_game(sc);
  const auto zero = zero_strategy(1, 10, sc.grid);
  const auto y = wealth_y0(run.market, zero, zero_strategy(2, 10, sc.grid));
  const auto c = cost_functional(sc.cost, 1, sc.grid, zero, y);
  EXPECT_EQ(c.mean, sc.cost.M1 * y.value);
  EXPECT_EQ(c.running_part, 0.0);
}

TEST(Cost, UnitInjectionUndiscounted) {
  const TimeGrid g(1.0, 50);
  const auto s = constant_strategy(1, 4, g, 1.0);
  for (double v : running_cost_samples(s, 2.0, 0.0, g)) EXPECT_NEAR(v, 2.0, 1e-14);
}

TEST(Cost, UnitInjectionDiscounted) {
  const TimeGrid g(1.0, 1000);
  const double beta = 0.3, weight_l = 1.5;
  const auto s = constant_strategy(2, 2, g, 1.0);
  const double exact = weight_l * (1.0 - std::exp(-beta)) / beta;
  for (double v : running_cost_samples(s, weight_l, beta, g)) {
    EXPECT_NEAR(v, exact, weight_l * beta * g.dt());
  }
}

TEST(GirsanovCost, UnitWeightIsThePlainExpectation) {
  const TimeGrid g(1.0, 16);
  const RealPath z(5, 17, 1, 1.0);
  RealPath running(5, 17, 1);
  std::vector<double> terminal(5);
  for (std::size_t p = 0; p < 5; ++p) {
    terminal[p] = 0.1 * p;
    for (std::size_t j = 0; j <= 16; ++j) running(p, j) = 0.5 + 0.01 * p * j;
  }
  const auto c = girsanov_cost(g, z, running, terminal, 0.25);
  double expected = 0.0;
  for (std::size_t p = 0; p < 5; ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 16; ++j) acc += running(p, j);
    expected += acc * g.dt() + terminal[p];
  }
  EXPECT_NEAR(c.mean, expected / 5.0 + 0.25, 1e-14);
}

TEST(GirsanovCost, ReproducesTheCostFunctionalWithoutObservationControl) {
  const auto sc = fixtures::small_default(500, 32);
  const GameRun run = prepare_game(sc);
  const auto y = wealth_y0(run.market, run.candidate1, run.candidate2);
  const auto direct = cost_functional(sc.cost, 1, sc.grid, run.candidate1, y);
  RealPath running(500, 33, 1);
  for (std::size_t p = 0; p < 500; ++p) {
    for (std::size_t j = 0; j <= 32; ++j) {
      running(p, j) = sc.cost.L1 * std::exp(-sc.cost.beta * sc.grid.time(j)) * run.candidate1(p, j) *
                      run.candidate1(p, j);
    }
  }
  const std::vector<double> no_terminal(500, 0.0);
  const auto weighted = girsanov_cost(sc.grid, RealPath(500, 33, 1, 1.0), running, no_terminal,
                                      sc.cost.M1 * y.value);
  EXPECT_NEAR(weighted.mean, direct.mean, 1e-12);
  EXPECT_NEAR(weighted.running_part, direct.running_part, 1e-12);
}

TEST(GirsanovCost, UnitRunningCostGivesTheHorizon) {
  const TimeGrid g(2.0, 32);
  const std::size_t n = 20000;
  const auto dY = sample_brownian_bundle(g, {0, 1, 0}, n, 3).dW[1];
  const RealPath z = girsanov_weight(g, RealPath(n, 33, 1, 0.6), dY);
  const auto c = girsanov_cost(g, z, RealPath(n, 33, 1, 1.0), std::vector<double>(n, 0.0), 0.0);
  EXPECT_LE(std::abs(c.mean - 2.0), 4.0 * c.std_error);
}

TEST(Hamiltonian, ZeroArguments) {
  ExampleHamiltonianPoint x;
  for (auto& v : x.z) v.assign(1, 0.0);
  for (auto& v : x.b) v.assign(1, 0.0);
  EXPECT_EQ(hamiltonian_example(x, 1, 1.0, 0.0), 0.0);
}

TEST(Hamiltonian, WealthTermOnly) {
  ExampleHamiltonianPoint x;
  x.y = 1.0;
  x.r = 0.1;
  x.p = -2.0;
  EXPECT_NEAR(hamiltonian_example(x, 2, 1.0, 0.05), -0.2, 1e-16);
}

TEST(Hamiltonian, ControlGradientVanishesAtTheCandidate) {
  ExampleHamiltonianPoint x;
  x.t = 0.7;
  x.p = -1.3;
  const double weight_l = 0.8, beta = 0.05;
  x.injection1 = -0.5 * std::exp(beta * x.t) * x.p / weight_l;
  EXPECT_NEAR(hamiltonian_example_control_gradient(x, 1, weight_l, beta), 0.0, 1e-15);
  // finite difference agrees with the analytic gradient
  const double h = 1e-5;
  ExampleHamiltonianPoint up = x, down = x;
  up.injection1 += h;
  down.injection1 -= h;
  EXPECT_NEAR((hamiltonian_example(up, 1, weight_l, beta) - hamiltonian_example(down, 1, weight_l, beta)) / (2 * h),
              0.0, 1e-9);
}

TEST(Hamiltonian, GeneralForm) {
  EXPECT_EQ(hamiltonian_general({}, {}, {}), 0.0);
  GeneralCoefficients c;
  GeneralAdjoint a;
  c.b = 2.0;
  a.q = 1.0;
  EXPECT_EQ(hamiltonian_general(c, a, {}), 2.0);
  GeneralCoefficients f;
  f.f = -3.0;
  GeneralAdjoint p;
  p.p = 2.0;
  EXPECT_EQ(hamiltonian_general(f, p, {}), 6.0);
}

TEST(Hamiltonian, GeneralFormSpecialisesToTheExample) {
  // q = k = Q = 0, h = 0 and f = -(r y + b z + I1 + I2)
  ExampleHamiltonianPoint x;
  x.t = 0.3;
  x.y = 1.2;
  x.r = 0.03;
  x.p = -2.0;
  x.injection1 = 0.4;
  x.injection2 = 0.9;
  x.z = {std::vector<double>{0.1}, std::vector<double>{-0.2}, std::vector<double>{0.05}};
  x.b = {std::vector<double>{0.5}, std::vector<double>{0.25}, std::vector<double>{-0.75}};
  const double weight_l = 1.5, beta = 0.05;
  GeneralCoefficients c;
  c.f = -(x.r * x.y + drift_pairing(x) + x.injection1 + x.injection2);
  c.l = weight_l * std::exp(-beta * x.t) * x.injection1 * x.injection1;
  GeneralAdjoint a;
  a.p = x.p;
  EXPECT_NEAR(hamiltonian_general(c, a, {}), hamiltonian_example(x, 1, weight_l, beta), 1e-15);
}

TEST(Hamiltonian, TildeGradient) {
  EXPECT_EQ(tilde_h_gradient(1.7, 2.0, {3.0, 4.0}, {0.0, 0.0}), 1.7);
  EXPECT_EQ(tilde_h_gradient(1.0, 1.0, {2.0, 0.0}, {3.0, 0.0}), -5.0);
  EXPECT_EQ(tilde_h_gradient(1.0, 0.0, {2.0, 5.0}, {3.0, 1.0}), 1.0);
}

TEST(Strategy, ObservationViewRefusesTheFuture) {
  const TimeGrid g(1.0, 4);
  const RealPath y(1, 5, 1, 0.5);
  const ObservationView view(y, 0, 2, g);
  EXPECT_EQ(view(2), 0.5);
  EXPECT_THROW(view(3), ContractViolation);
}

TEST(Strategy, TabulatedRulesAreClampedAndCounted) {
  const TimeGrid g(1.0, 4);
  RealPath y(2, 5, 1);
  for (std::size_t j = 0; j <= 4; ++j) {
    y(0, j) = 0.1 * j;
    y(1, j) = -0.1 * j;
  }
  const auto s = tabulated_strategy(1, y, [](const ObservationView& v) { return v.current(); }, g);
  EXPECT_EQ(s.clamped, 4u);
  for (double v : s.values.raw()) EXPECT_GE(v, 0.0);
  EXPECT_DOUBLE_EQ(s(0, 3), 0.3);
}
