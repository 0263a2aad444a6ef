#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/regression.hpp"
#include "fbsde/core/time_grid.hpp"

namespace fbsde {

// Degree-2 polynomial features of (Y(t), int_0^t Y ds) for one player's
// observation path, cross-sectionally at node `node`. Only information up to
// t enters. Time itself is constant within a cross-section and is absorbed
// by the intercept.
inline Eigen::MatrixXd observation_features(const RealPath& y, std::size_t node,
                                            const TimeGrid& grid, int degree = 2) {
  if (y.points() != grid.n_nodes() || node >= y.points()) {
    throw InvalidArgument("observation_features: node outside the observation grid");
  }
  const auto n = static_cast<Eigen::Index>(y.paths());
  const auto d = static_cast<Eigen::Index>(y.dim());
  Eigen::MatrixXd vars(n, 2 * d);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto pp = static_cast<std::size_t>(p);
      const auto cc = static_cast<std::size_t>(c);
      double integral = 0.0;
      for (std::size_t j = 0; j < node; ++j) integral += y(pp, j, cc);
      vars(p, c) = y(pp, node, cc);
      vars(p, d + c) = integral * grid.dt();
    }
  }
  return polynomial_features(vars, degree);
}

struct ConditionalEstimate {
  Eigen::VectorXd fitted;
  Eigen::VectorXd coefficients;  // standardised feature basis
  double r_squared = 0.0;
  double condition_number = 1.0;
};

// Cross-sectional least-squares proxy for E[target | F_t^i].
inline ConditionalEstimate conditional_expectation(std::span<const double> target,
                                                   const Eigen::MatrixXd& features) {
  const auto n = static_cast<Eigen::Index>(target.size());
  if (features.rows() != n) throw InvalidArgument("conditional_expectation: row count mismatch");
  if (n < 10 * features.cols()) {
    throw InvalidArgument("conditional_expectation: need at least 10 samples per feature (" +
                          std::to_string(n) + " samples, " + std::to_string(features.cols()) +
                          " features)");
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(target.data(), n);
  const RegressionFit fit = least_squares(features, y);
  ConditionalEstimate e;
  e.fitted = fit.fitted.col(0);
  e.coefficients = fit.coefficients.col(0);
  e.r_squared = fit.r_squared(0);
  e.condition_number = fit.condition_number;
  return e;
}

// Regression estimate of Cov(a, b | F) = E[ab|F] - E[a|F] E[b|F].
inline Eigen::VectorXd conditional_covariance(std::span<const double> a, std::span<const double> b,
                                              const Eigen::MatrixXd& features) {
  if (a.size() != b.size()) throw InvalidArgument("conditional_covariance: size mismatch");
  std::vector<double> ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] * b[i];
  const auto eab = conditional_expectation(ab, features);
  const auto ea = conditional_expectation(a, features);
  const auto eb = conditional_expectation(b, features);
  return eab.fitted - ea.fitted.cwiseProduct(eb.fitted);
}

}  // namespace fbsde
