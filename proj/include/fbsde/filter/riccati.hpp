#pragma once

#include <Eigen/Dense>
#include <sstream>
#include <vector>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/time_grid.hpp"
#include "fbsde/filter/models.hpp"

namespace fbsde {

// Filter error covariance at every grid node.
struct CovariancePath {
  std::vector<Matrix> nodes;
  std::vector<double> min_eigenvalue;

  std::size_t size() const { return nodes.size(); }
  const Matrix& operator[](std::size_t k) const { return nodes[k]; }
};

inline constexpr double kPsdTolerance = 1e-8;

// Right-hand side of the filter Riccati equation
//   P' = zeta zeta^T - (theta P + P theta^T) - P H^T H P,   H = Sigma^{-1}.
inline Matrix riccati_rhs(const Matrix& P, const Matrix& theta, const Matrix& diffusion,
                          const Matrix& info) {
  return diffusion - (theta * P + P * theta.transpose()) - P * info * P;
}

// Classical RK4 on the grid, symmetrising after every step.
inline CovariancePath solve_riccati(const OUParams& params, const ObservationModel& obs,
                                    const TimeGrid& grid) {
  params.validate("solve_riccati", true);
  if (obs.dim() != params.dim()) {
    throw InvalidArgument("solve_riccati: observation and drift dimensions disagree");
  }
  const Matrix theta = params.theta.asDiagonal();
  const Matrix diffusion = params.zeta * params.zeta.transpose();
  const Matrix& h = obs.sigma_inv();
  const Matrix info = h.transpose() * h;
  const double dt = grid.dt();

  CovariancePath out;
  out.nodes.reserve(grid.n_nodes());
  out.min_eigenvalue.reserve(grid.n_nodes());
  Matrix P = 0.5 * (params.P0 + params.P0.transpose());

  auto record = [&](std::size_t k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -kPsdTolerance || !P.allFinite()) {
      std::ostringstream msg;
      msg << "solve_riccati: covariance lost positive semidefiniteness at step " << k
          << " (t=" << grid.time(k) << ", min eigenvalue " << lmin << ")";
      throw NumericalFailure(msg.str());
    }
    out.nodes.push_back(P);
    out.min_eigenvalue.push_back(lmin);
  };

  record(0);
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const Matrix k1 = riccati_rhs(P, theta, diffusion, info);
    const Matrix k2 = riccati_rhs(P + 0.5 * dt * k1, theta, diffusion, info);
    const Matrix k3 = riccati_rhs(P + 0.5 * dt * k2, theta, diffusion, info);
    const Matrix k4 = riccati_rhs(P + dt * k3, theta, diffusion, info);
    P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    P = 0.5 * (P + P.transpose()).eval();
    record(k + 1);
  }
  return out;
}

}  // namespace fbsde
