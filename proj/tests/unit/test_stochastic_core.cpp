#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/ito.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/core/philox.hpp"
#include "fbsde/core/regression.hpp"
#include "fbsde/core/statistics.hpp"
#include "fbsde/core/time_grid.hpp"

using namespace fbsde;

namespace {

Increments hand_increments(std::vector<double> values) {
  Increments d(1, values.size(), 1);
  for (std::size_t j = 0; j < values.size(); ++j) d(0, j) = values[j];
  return d;
}

RealPath constant_path(std::size_t paths, std::size_t nodes, double v) {
  return RealPath(paths, nodes, 1, v);
}

}  // namespace

TEST(TimeGrid, FourSteps) {
  const TimeGrid g = make_time_grid(1.0, 4);
  EXPECT_DOUBLE_EQ(g.dt(), 0.25);
  const std::vector<double> nodes{0.0, 0.25, 0.5, 0.75, 1.0};
  ASSERT_EQ(g.n_nodes(), nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) EXPECT_DOUBLE_EQ(g.time(k), nodes[k]);
}

TEST(TimeGrid, TwoStepsAndFineGrid) {
  EXPECT_DOUBLE_EQ(make_time_grid(2.0, 2).dt(), 1.0);
  EXPECT_DOUBLE_EQ(make_time_grid(0.5, 100).dt(), 0.005);
}

TEST(TimeGrid, StepsTimesDtIsHorizon) {
  for (std::size_t n : {2u, 3u, 7u, 100u, 128u, 1000u}) {
    for (double t : {0.1, 1.0, 2.5, 7.0}) {
      const TimeGrid g(t, n);
      EXPECT_NEAR(g.dt() * static_cast<double>(n), t, std::abs(t) * 2.3e-16);
      EXPECT_EQ(g.time(n), t);
    }
  }
}

TEST(TimeGrid, RejectsBadInput) {
  EXPECT_THROW(make_time_grid(0.0, 4), InvalidArgument);
  EXPECT_THROW(make_time_grid(-1.0, 4), InvalidArgument);
  EXPECT_THROW(make_time_grid(1.0, 1), InvalidArgument);
  EXPECT_THROW(make_time_grid(NAN, 4), InvalidArgument);
}

TEST(Philox, KnownAnswers) {
  const auto zero = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero[0], 0x6627e8d5u);
  EXPECT_EQ(zero[1], 0xe169c58du);
  EXPECT_EQ(zero[2], 0xbc57ac4cu);
  EXPECT_EQ(zero[3], 0x9b00dbd8u);
  const auto ones = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones[0], 0x408f276du);
  EXPECT_EQ(ones[1], 0x41c83b0eu);
  EXPECT_EQ(ones[2], 0xa20bc7c6u);
  EXPECT_EQ(ones[3], 0x6d5451fdu);
}

TEST(Philox, UniformsStayInsideTheOpenInterval) {
  EXPECT_GT(uniform_open01(0u, 0u), 0.0);
  EXPECT_LT(uniform_open01(0xffffffffu, 0xffffffffu), 1.0);
}

TEST(Brownian, SameSeedIsBitIdentical) {
  const TimeGrid g(1.0, 16);
  const auto a = sample_brownian_bundle(g, {1, 2, 1}, 300, 42);
  const auto b = sample_brownian_bundle(g, {1, 2, 1}, 300, 42);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    EXPECT_TRUE(a.dW[k] == b.dW[k]);
    EXPECT_TRUE(a.dWbar[k] == b.dWbar[k]);
    EXPECT_EQ(a.prior[k], b.prior[k]);
  }
  const auto c = sample_brownian_bundle(g, {1, 2, 1}, 300, 43);
  EXPECT_FALSE(a.dW[1] == c.dW[1]);
}

TEST(Brownian, ThreadCountDoesNotChangeBits) {
  const TimeGrid g(1.0, 8);
  ::setenv("FBSDE_LAB_THREADS", "1", 1);
  const auto one = sample_brownian_bundle(g, {1, 1, 1}, 257, 9);
  ::setenv("FBSDE_LAB_THREADS", "4", 1);
  EXPECT_EQ(worker_count(), 4u);
  const auto four = sample_brownian_bundle(g, {1, 1, 1}, 257, 9);
  ::unsetenv("FBSDE_LAB_THREADS");
  for (std::size_t k = 0; k < kBlocks; ++k) EXPECT_TRUE(one.dW[k] == four.dW[k]);
}

TEST(Brownian, PathsDoNotDependOnBundleSize) {
  const TimeGrid g(1.0, 8);
  const auto small = sample_brownian_bundle(g, {1, 1, 1}, 10, 5);
  const auto large = sample_brownian_bundle(g, {1, 1, 1}, 50, 5);
  for (std::size_t p = 0; p < 10; ++p) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(small.dW[2](p, j), large.dW[2](p, j));
  }
}

TEST(Brownian, OnlyDeclaredBlocksArePopulated) {
  const auto b = sample_brownian_bundle(TimeGrid(1.0, 4), {0, 1, 0}, 5, 1);
  EXPECT_TRUE(b.dW[0].empty());
  EXPECT_FALSE(b.dW[1].empty());
  EXPECT_TRUE(b.dW[2].empty());
  EXPECT_EQ(b.dW[1].paths(), 5u);
  EXPECT_EQ(b.dW[1].points(), 4u);
  EXPECT_EQ(b.dW[1].dim(), 1u);
}

TEST(Brownian, RejectsDegenerateRequests) {
  const TimeGrid g(1.0, 4);
  EXPECT_THROW(sample_brownian_bundle(g, {0, 0, 0}, 5, 1), InvalidArgument);
  EXPECT_THROW(sample_brownian_bundle(g, {1, 1, 1}, 0, 1), InvalidArgument);
}

TEST(Brownian, IncrementMeanAndVarianceMatchDt) {
  const TimeGrid g(1.0, 4);
  const std::size_t n = 100000;
  const auto b = sample_brownian_bundle(g, {1, 3, 2}, n, 2024);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    for (std::size_t c = 0; c < b.dims[k]; ++c) {
      for (std::size_t j = 0; j < g.n_steps(); ++j) {
        std::vector<double> xs(n);
        for (std::size_t p = 0; p < n; ++p) xs[p] = b.dW[k](p, j, c);
        const auto e = estimate_mean(xs);
        EXPECT_LE(std::abs(e.mean), 4.0 * std::sqrt(g.dt() / n)) << "block " << k << " comp " << c;
        EXPECT_LE(std::abs(sample_variance(xs) - g.dt()), 5.0 * g.dt() * std::sqrt(2.0 / n));
      }
    }
  }
}

TEST(Brownian, BlocksAreUncorrelated) {
  const TimeGrid g(1.0, 2);
  const std::size_t n = 50000;
  const auto b = sample_brownian_bundle(g, {1, 1, 1}, n, 77);
  std::vector<double> prod(n);
  for (std::size_t p = 0; p < n; ++p) prod[p] = b.dW[1](p, 0) * b.dW[2](p, 0) / g.dt();
  EXPECT_LE(std::abs(estimate_mean(prod).mean), 4.0 / std::sqrt(n));
  for (std::size_t p = 0; p < n; ++p) prod[p] = b.dW[1](p, 0) * b.dWbar[1](p, 0) / g.dt();
  EXPECT_LE(std::abs(estimate_mean(prod).mean), 4.0 / std::sqrt(n));
}

TEST(Brownian, ResamplingKeepsOnlyTheChosenBlock) {
  const TimeGrid g(1.0, 8);
  const auto base = sample_brownian_bundle(g, {1, 1, 1}, 64, 11);
  const auto other = resample_other_blocks(base, 1, 99);
  EXPECT_TRUE(base.dW[1] == other.dW[1]);
  EXPECT_TRUE(base.dWbar[1] == other.dWbar[1]);
  EXPECT_EQ(base.prior[1], other.prior[1]);
  EXPECT_FALSE(base.dW[0] == other.dW[0]);
  EXPECT_FALSE(base.dW[2] == other.dW[2]);
  EXPECT_FALSE(base.dWbar[2] == other.dWbar[2]);
}

TEST(Ito, ZeroIntegrandGivesZero) {
  const auto dW = sample_brownian_bundle(TimeGrid(1.0, 8), {0, 1, 0}, 4, 3).dW[1];
  const RealPath out = ito_integral(constant_path(4, 9, 0.0), dW);
  for (double v : out.raw()) EXPECT_EQ(v, 0.0);
}

TEST(Ito, UnitIntegrandReproducesCumulativeSumsBitForBit) {
  const auto dW = sample_brownian_bundle(TimeGrid(1.0, 32), {0, 2, 0}, 7, 3).dW[1];
  RealPath ones(7, 33, 2, 1.0);
  const RealPath out = ito_integral(ones, dW);
  const RealPath w = cumulate(dW);
  EXPECT_TRUE(out == w);
}

TEST(Ito, HandSumUsesLeftEndpoints) {
  const Increments dW = hand_increments({0.1, -0.2});
  const RealPath w = cumulate(dW);
  const RealPath out = ito_integral(w, dW);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.0);
  EXPECT_NEAR(out(0, 2), -0.02, 1e-17);
}

TEST(Ito, ShapeMismatchIsRejected) {
  const Increments dW = hand_increments({0.1, -0.2});
  EXPECT_THROW(ito_integral(constant_path(1, 4, 1.0), dW), InvalidArgument);
  EXPECT_THROW(ito_integral(RealPath(2, 3, 1), dW), InvalidArgument);
}

TEST(StochasticExponential, ZeroDriftIsOne) {
  const auto dW = sample_brownian_bundle(TimeGrid(1.0, 8), {0, 1, 0}, 3, 3).dW[1];
  const RealPath e = stochastic_exponential(constant_path(3, 9, 0.0), dW, 1, 0.125);
  for (double v : e.raw()) EXPECT_EQ(v, 1.0);
}

TEST(StochasticExponential, HandEvaluation) {
  const Increments dW = hand_increments({0.1, -0.2});
  const RealPath e = stochastic_exponential(constant_path(1, 3, 1.0), dW, -1, 0.25);
  EXPECT_NEAR(e(0, 2), std::exp(-0.15), 1e-15);
  EXPECT_EQ(e(0, 0), 1.0);
}

TEST(StochasticExponential, MartingaleMeanAtEveryNode) {
  const TimeGrid g(1.0, 16);
  const std::size_t n = 100000;
  const auto dW = sample_brownian_bundle(g, {0, 1, 0}, n, 8).dW[1];
  for (int sign : {1, -1}) {
    const RealPath e = stochastic_exponential(g, constant_path(n, 17, 0.7), dW, sign);
    for (std::size_t j = 0; j <= 16; ++j) {
      const auto m = estimate_mean(e.cross_section(j));
      EXPECT_LE(std::abs(m.mean - 1.0), 4.0 * m.std_error + 1e-15) << "node " << j;
    }
  }
}

TEST(StochasticExponential, LogSpaceSurvivesLongHorizons) {
  const TimeGrid g(400.0, 400);
  const auto dW = sample_brownian_bundle(g, {0, 1, 0}, 4, 1).dW[1];
  const RealPath e = stochastic_exponential(g, constant_path(4, 401, 5.0), dW, 1);
  for (double v : e.raw()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
  }
}

TEST(Girsanov, ZeroIntegrandIsOne) {
  const auto dY = sample_brownian_bundle(TimeGrid(1.0, 8), {0, 1, 0}, 3, 3).dW[1];
  const RealPath z = girsanov_weight(TimeGrid(1.0, 8), constant_path(3, 9, 0.0), dY);
  for (double v : z.raw()) EXPECT_EQ(v, 1.0);
}

TEST(Girsanov, HandEvaluation) {
  const RealPath z = girsanov_weight(constant_path(1, 2, 2.0), hand_increments({0.3}), 0.1);
  EXPECT_NEAR(z(0, 1), std::exp(0.4), 1e-15);
}

TEST(Girsanov, UnitMeanUnderPureBrownianObservations) {
  const TimeGrid g(1.0, 8);
  const std::size_t n = 100000;
  const auto dY = sample_brownian_bundle(g, {0, 2, 0}, n, 31).dW[1];
  RealPath h(n, 9, 2);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < 9; ++j) {
      h(p, j, 0) = 0.5;
      h(p, j, 1) = -0.8;
    }
  }
  const RealPath z = girsanov_weight(g, h, dY);
  for (std::size_t j = 0; j <= 8; ++j) {
    const auto m = estimate_mean(z.cross_section(j));
    EXPECT_LE(std::abs(m.mean - 1.0), 4.0 * m.std_error + 1e-15);
  }
}

TEST(Girsanov, ShapeMismatchIsRejected) {
  EXPECT_THROW(girsanov_weight(constant_path(1, 3, 2.0), hand_increments({0.3}), 0.1), InvalidArgument);
}

TEST(Statistics, PairwiseSumAndMean) {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
  EXPECT_EQ(pairwise_sum(xs), 499500.0);
  const auto e = estimate_mean(xs);
  EXPECT_DOUBLE_EQ(e.mean, 499.5);
  EXPECT_NEAR(e.std_error, std::sqrt(83416.66666666667 / 1000.0), 1e-9);
}

TEST(Regression, ReproducesTargetsInsideTheSpan) {
  const std::size_t n = 200;
  Eigen::MatrixXd vars(n, 2);
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::sin(0.1 * i);
    const double y = std::cos(0.37 * i);
    vars(i, 0) = x;
    vars(i, 1) = y;
    target(i) = 1.5 - 2.0 * x + 0.25 * x * y + 3.0 * y * y;
  }
  const auto fit = least_squares(polynomial_features(vars, 2), target);
  EXPECT_LE((fit.fitted.col(0) - target).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(fit.r_squared(0), 1.0, 1e-12);
}

TEST(Regression, RankDeficiencyIsANumericalFailure) {
  Eigen::MatrixXd f(50, 3);
  for (int i = 0; i < 50; ++i) {
    f(i, 0) = 1.0;
    f(i, 1) = i;
    f(i, 2) = 2.0 * i + 1.0;
  }
  EXPECT_THROW(LinearProjector{f}, NumericalFailure);
  const auto kept = drop_degenerate_columns(f);
  EXPECT_EQ(kept.cols(), 2);
}
