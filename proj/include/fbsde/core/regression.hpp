#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "fbsde/core/errors.hpp"

namespace fbsde {

struct RegressionFit {
  Eigen::MatrixXd coefficients;  // in the standardised feature basis, one column per target
  Eigen::MatrixXd fitted;        // n_samples x n_targets
  Eigen::VectorXd r_squared;
  double condition_number = 1.0;
};

inline constexpr double kMaxConditionNumber = 1e10;

// Least-squares projection onto the span of a fixed design. Column 0 must
// be the intercept (all ones); the remaining columns are centred and scaled
// before the QR factorisation so that the condition number reflects genuine
// collinearity rather than units. One factorisation serves any number of
// target columns.
class LinearProjector {
 public:
  explicit LinearProjector(const Eigen::MatrixXd& features,
                           double max_condition = kMaxConditionNumber) {
    const Eigen::Index n = features.rows();
    const Eigen::Index k = features.cols();
    if (k == 0 || n < k) throw InvalidArgument("least_squares: fewer samples than features");
    x_ = features;
    for (Eigen::Index c = 1; c < k; ++c) {
      const double mean = x_.col(c).mean();
      x_.col(c).array() -= mean;
      const double scale = std::sqrt(x_.col(c).squaredNorm() / static_cast<double>(n));
      if (scale > 0.0) x_.col(c) /= scale;
    }
    qr_.compute(x_);
    const Eigen::MatrixXd r = qr_.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    condition_ = smin > 0.0 ? sv(0) / smin : INFINITY;
    if (!(condition_ <= max_condition)) {
      std::ostringstream msg;
      msg << "least_squares: rank-deficient design (condition number " << condition_
          << ", limit " << max_condition << ")";
      throw NumericalFailure(msg.str());
    }
  }

  double condition_number() const { return condition_; }
  Eigen::Index samples() const { return x_.rows(); }
  Eigen::Index features() const { return x_.cols(); }

  RegressionFit fit(const Eigen::MatrixXd& targets) const {
    if (targets.rows() != x_.rows()) throw InvalidArgument("least_squares: row count mismatch");
    RegressionFit out;
    out.condition_number = condition_;
    out.coefficients = qr_.solve(targets);
    out.fitted = x_ * out.coefficients;
    out.r_squared.resize(targets.cols());
    for (Eigen::Index t = 0; t < targets.cols(); ++t) {
      const double mean = targets.col(t).mean();
      const double tss = (targets.col(t).array() - mean).square().sum();
      const double rss = (targets.col(t) - out.fitted.col(t)).squaredNorm();
      out.r_squared(t) = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    }
    return out;
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  double condition_ = 1.0;
};

inline RegressionFit least_squares(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                                   double max_condition = kMaxConditionNumber) {
  return LinearProjector(features, max_condition).fit(targets);
}

// Intercept plus every monomial of total degree <= degree in the columns of
// `vars` (degree 0, 1 or 2).
inline Eigen::MatrixXd polynomial_features(const Eigen::MatrixXd& vars, int degree) {
  if (degree < 0 || degree > 2) throw InvalidArgument("polynomial_features: degree must be 0..2");
  const Eigen::Index n = vars.rows();
  const Eigen::Index d = degree == 0 ? 0 : vars.cols();
  Eigen::Index count = 1 + d + (degree == 2 ? d * (d + 1) / 2 : 0);
  Eigen::MatrixXd f(n, count);
  f.col(0).setOnes();
  Eigen::Index c = 1;
  for (Eigen::Index i = 0; i < d; ++i) f.col(c++) = vars.col(i);
  if (degree == 2) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) f.col(c++) = vars.col(i).cwiseProduct(vars.col(j));
    }
  }
  return f;
}

// Drops columns (other than the intercept) that carry no variation or that
// are exact linear combinations of the others, e.g. a filter mean that is
// still an affine function of the first observation increment.
inline Eigen::MatrixXd drop_degenerate_columns(const Eigen::MatrixXd& features,
                                               double rank_tolerance = 1e-9) {
  const Eigen::Index n = features.rows();
  std::vector<Eigen::Index> varying;
  Eigen::MatrixXd scaled(n, features.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 1; c < features.cols(); ++c) {
    const auto col = features.col(c);
    const double mean = col.mean();
    const double spread = (col.array() - mean).abs().maxCoeff();
    if (!(spread > 1e-12 * (1.0 + std::abs(mean)))) continue;
    scaled.col(kept) = col.array() - mean;
    scaled.col(kept) /= scaled.col(kept).norm();
    varying.push_back(c);
    ++kept;
  }
  std::vector<Eigen::Index> keep{0};
  if (kept > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled.leftCols(kept));
    qr.setThreshold(rank_tolerance);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = 0; i < qr.rank(); ++i) keep.push_back(varying[static_cast<std::size_t>(perm(i))]);
    std::sort(keep.begin(), keep.end());
  }
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = features.col(keep[i]);
  return out;
}

}  // namespace fbsde
