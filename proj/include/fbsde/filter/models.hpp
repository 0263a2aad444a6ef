#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "fbsde/core/errors.hpp"

namespace fbsde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Mean-reverting drift of one stock block:
//   d mu = theta (delta - mu) dt + zeta dWbar,  mu(0) ~ N(m0, P0).
struct OUParams {
  Vector theta;  // diagonal of the mean-reversion matrix, entries > 0
  Vector delta;
  Matrix zeta;
  Vector m0;
  Matrix P0;

  Eigen::Index dim() const { return theta.size(); }

  // Defaults follow the example game: prior mean of ones, identity covariance.
  static OUParams with_default_prior(Vector theta, Vector delta, Matrix zeta) {
    const Eigen::Index n = theta.size();
    return {std::move(theta), std::move(delta), std::move(zeta), Vector::Ones(n),
            Matrix::Identity(n, n)};
  }

  // The Riccati equation alone tolerates theta = 0 (no mean reversion).
  void validate(const std::string& where, bool allow_zero_theta = false) const {
    const Eigen::Index n = dim();
    if (delta.size() != n || zeta.rows() != n || zeta.cols() != n || m0.size() != n ||
        P0.rows() != n || P0.cols() != n) {
      throw InvalidArgument(where + ": OU parameter dimensions disagree (n=" +
                            std::to_string(n) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool ok = allow_zero_theta ? theta(i) >= 0.0 : theta(i) > 0.0;
      if (!ok) throw InvalidArgument(where + ": theta entries must be positive");
    }
    if ((P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + P0.cwiseAbs().maxCoeff())) {
      throw InvalidArgument(where + ": P0 must be symmetric");
    }
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(P0);
      if (es.eigenvalues().minCoeff() < -1e-12) {
        throw InvalidArgument(where + ": P0 must be positive semidefinite");
      }
    }
  }

  // Lower factor L with L L^T = P0 (P0 may be singular).
  Matrix prior_factor() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(P0);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
  }
};

using ShortRate = std::function<double(double)>;

inline ShortRate constant_rate(double r) {
  return [r](double) { return r; };
}

// Volatility of one observed stock block together with the bond rate.
// Observation dY = Sigma^{-1} d log S = eta dt + dW with
// eta = Sigma^{-1}(mu - A/2) and b = Sigma^{-1}(mu - r 1).
class ObservationModel {
 public:
  ObservationModel(Matrix sigma, ShortRate rate) : sigma_(std::move(sigma)), rate_(std::move(rate)) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() == 0) {
      throw InvalidArgument("ObservationModel: volatility must be a non-empty square matrix");
    }
    Eigen::JacobiSVD<Matrix> svd(sigma_);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > 1e12) {
      throw InvalidArgument("ObservationModel: volatility matrix is singular or ill-conditioned");
    }
    sigma_inv_ = sigma_.inverse();
    a_diag_ = (sigma_ * sigma_.transpose()).diagonal();
  }

  Eigen::Index dim() const { return sigma_.rows(); }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_inv() const { return sigma_inv_; }
  // a_ii = sum_l sigma_il^2
  const Vector& a_diag() const { return a_diag_; }
  double rate(double t) const { return rate_(t); }
  const ShortRate& short_rate() const { return rate_; }

  // Offset b - eta = Sigma^{-1}(A/2 - r 1), deterministic.
  Vector b_minus_eta(double t) const {
    return sigma_inv_ * (0.5 * a_diag_ - Vector::Constant(dim(), rate(t)));
  }

 private:
  Matrix sigma_;
  Matrix sigma_inv_;
  Vector a_diag_;
  ShortRate rate_;
};

}  // namespace fbsde
