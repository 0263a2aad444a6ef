#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/errors.hpp"
#include "fbsde/core/time_grid.hpp"
#include "fbsde/filter/models.hpp"

namespace fbsde {

// Stock block k: volatility Sigma^k and the OU law of its appreciation rate.
struct BlockSpec {
  Matrix sigma;
  OUParams drift;

  std::size_t dim() const { return static_cast<std::size_t>(sigma.rows()); }
};

struct CostParams {
  double L1 = 1.0;
  double L2 = 1.0;
  double M1 = 1.0;
  double M2 = 1.0;
  double beta = 0.0;

  double L(int player) const { return player == 1 ? L1 : L2; }
  double M(int player) const { return player == 1 ? M1 : M2; }

  void validate() const {
    if (!(L1 > 0.0 && L2 > 0.0)) throw InvalidArgument("cost: L1 and L2 must be positive");
    if (!(M1 > 0.0 && M2 > 0.0)) throw InvalidArgument("cost: M1 and M2 must be positive");
    if (!(beta >= 0.0)) throw InvalidArgument("cost: beta must be nonnegative");
  }
};

// Terminal wealth target. Only bounded forms are offered:
//   constant:  xi = value
//   function:  xi = value * (1 + tanh(slope * s) / 2),  s = sum of terminal
//              observations of both players (plus W^0(T) when
//              uses_unobserved is set, which takes y out of the observable
//              filtrations).
struct TerminalClaim {
  enum class Kind { constant, function };
  Kind kind = Kind::constant;
  double value = 1.0;
  double slope = 1.0;
  bool uses_unobserved = false;

  void validate() const {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw InvalidArgument("terminal: value must be finite and nonnegative");
    }
    if (!std::isfinite(slope)) throw InvalidArgument("terminal: slope must be finite");
    if (kind == Kind::constant && uses_unobserved) {
      throw InvalidArgument("terminal: a constant claim cannot use unobserved noise");
    }
  }

  double evaluate(double observed_sum, double unobserved_sum) const {
    if (kind == Kind::constant) return value;
    const double s = observed_sum + (uses_unobserved ? unobserved_sum : 0.0);
    return value * (1.0 + 0.5 * std::tanh(slope * s));
  }
};

struct GameScenario {
  TimeGrid grid{1.0, 128};
  double rate = 0.03;
  std::array<std::optional<BlockSpec>, kBlocks> blocks;
  CostParams cost;
  TerminalClaim terminal;
  std::size_t n_paths = 20000;
  std::uint64_t seed = 1;

  BlockDims dims() const {
    BlockDims d{};
    for (std::size_t k = 0; k < kBlocks; ++k) d[k] = blocks[k] ? blocks[k]->dim() : 0;
    return d;
  }

  bool has_block(std::size_t k) const { return blocks[k].has_value() && blocks[k]->dim() > 0; }

  ObservationModel observation(std::size_t k) const {
    if (!has_block(k)) throw InvalidArgument("scenario: block " + std::to_string(k) + " is empty");
    return ObservationModel(blocks[k]->sigma, constant_rate(rate));
  }

  const OUParams& drift(std::size_t k) const {
    if (!has_block(k)) throw InvalidArgument("scenario: block " + std::to_string(k) + " is empty");
    return blocks[k]->drift;
  }

  void validate() const {
    if (!has_block(1) || !has_block(2)) {
      throw InvalidArgument("scenario: both players need a nonempty observed block");
    }
    if (!std::isfinite(rate)) throw InvalidArgument("scenario: r must be finite");
    for (std::size_t k = 0; k < kBlocks; ++k) {
      if (!has_block(k)) continue;
      const auto& b = *blocks[k];
      if (b.sigma.rows() != b.sigma.cols()) {
        throw InvalidArgument("scenario: sigma" + std::to_string(k) + " must be square");
      }
      if (b.drift.dim() != b.sigma.rows()) {
        throw InvalidArgument("scenario: drift." + std::to_string(k) +
                              " dimension disagrees with sigma" + std::to_string(k));
      }
      b.drift.validate("drift." + std::to_string(k));
      (void)observation(k);
    }
    cost.validate();
    terminal.validate();
    if (n_paths == 0) throw InvalidArgument("scenario: n_paths must be positive");
  }
};

// The bundled desk-scale scenario: one stock per block, T = 1, 128 steps.
// The prior is the stationary OU law around delta rather than N(1, I) so
// that the deflator keeps a moderate variance.
inline GameScenario default_scenario() {
  GameScenario s;
  s.grid = TimeGrid(1.0, 128);
  s.rate = 0.03;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    BlockSpec b;
    b.sigma = Matrix::Constant(1, 1, 0.2);
    b.drift.theta = Vector::Constant(1, 1.0);
    b.drift.delta = Vector::Constant(1, 0.08);
    b.drift.zeta = Matrix::Constant(1, 1, 0.1);
    b.drift.m0 = Vector::Constant(1, 0.08);
    b.drift.P0 = Matrix::Constant(1, 1, 0.005);
    s.blocks[k] = b;
  }
  s.cost = CostParams{1.0, 1.0, 2.0, 3.0, 0.05};
  s.terminal = TerminalClaim{};
  s.n_paths = 20000;
  s.seed = 20240501;
  return s;
}

}  // namespace fbsde
