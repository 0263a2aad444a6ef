#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fbsde/core/brownian.hpp"
#include "fbsde/core/errors.hpp"

namespace fbsde {

// Pointwise arguments of the investment-game Hamiltonian.
struct ExampleHamiltonianPoint {
  double t = 0.0;
  double y = 0.0;
  std::array<std::vector<double>, kBlocks> z;  // z^k row vectors
  std::array<std::vector<double>, kBlocks> b;  // b^k
  double injection1 = 0.0;
  double injection2 = 0.0;
  double p = 0.0;  // adjoint p_i
  double r = 0.0;
};

inline double drift_pairing(const ExampleHamiltonianPoint& x) {
  double bz = 0.0;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (x.b[k].size() != x.z[k].size()) {
      throw InvalidArgument("hamiltonian: b^" + std::to_string(k) + " and z^" +
                            std::to_string(k) + " differ in length");
    }
    for (std::size_t c = 0; c < x.b[k].size(); ++c) bz += x.b[k][c] * x.z[k][c];
  }
  return bz;
}

// H_i = (r y + sum_k (b^k)^T (z^k)^T + I_1 + I_2) p_i + L_i e^{-beta t} I_i^2
inline double hamiltonian_example(const ExampleHamiltonianPoint& x, int player, double weight_l,
                                  double beta) {
  if (player != 1 && player != 2) throw InvalidArgument("hamiltonian: player must be 1 or 2");
  const double own = player == 1 ? x.injection1 : x.injection2;
  const double driver = x.r * x.y + drift_pairing(x) + x.injection1 + x.injection2;
  return driver * x.p + weight_l * std::exp(-beta * x.t) * own * own;
}

// dH_i/dI_i = p_i + 2 L_i e^{-beta t} I_i
inline double hamiltonian_example_control_gradient(const ExampleHamiltonianPoint& x, int player,
                                                   double weight_l, double beta) {
  const double own = player == 1 ? x.injection1 : x.injection2;
  return x.p + 2.0 * weight_l * std::exp(-beta * x.t) * own;
}

// Coefficient values of the general partially observed system at one point,
// j = 1, 2 indexing the observation channels.
struct GeneralCoefficients {
  double b = 0.0;
  double sigma = 0.0;
  std::array<double, 2> sigma_j{};
  std::array<double, 2> h_j{};
  double f = 0.0;
  double l = 0.0;
};

struct GeneralAdjoint {
  double q = 0.0;
  double k = 0.0;
  std::array<double, 2> k_j{};
  std::array<double, 2> big_q_j{};
  double p = 0.0;
};

struct GeneralState {
  std::array<double, 2> z_j{};
};

// H_i = b q + sigma k + sum_j [sigma_j k_j + h_j Q_j] - [f - sum_j h_j z_j] p + l
inline double hamiltonian_general(const GeneralCoefficients& c, const GeneralAdjoint& a,
                                  const GeneralState& s) {
  double channels = 0.0;
  double hz = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    channels += c.sigma_j[j] * a.k_j[j] + c.h_j[j] * a.big_q_j[j];
    hz += c.h_j[j] * s.z_j[j];
  }
  return c.b * a.q + c.sigma * a.k + channels - (c.f - hz) * a.p + c.l;
}

// H~_{v_i} = H_{v_i} - sum_j q_i sigma_j h_{j v_i}; equals H_{v_i} when the
// observation drift does not depend on the control.
inline double tilde_h_gradient(double h_gradient, double q, const std::array<double, 2>& sigma_j,
                               const std::array<double, 2>& h_j_control) {
  double correction = 0.0;
  for (std::size_t j = 0; j < 2; ++j) correction += q * sigma_j[j] * h_j_control[j];
  return h_gradient - correction;
}

}  // namespace fbsde
