#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fbsde {

// Pairwise (cascade) summation: error grows like O(log n) instead of O(n),
// and the result depends only on the order of the input.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 32;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n)
  std::size_t n = 0;

  double z_score(double reference) const {
    const double diff = mean - reference;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : (diff > 0 ? INFINITY : -INFINITY);
  }
};

inline MeanEstimate estimate_mean(std::span<const double> xs) {
  MeanEstimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  e.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return e;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - e.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
  e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  return e;
}

inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = pairwise_sum(xs) / static_cast<double>(xs.size());
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

}  // namespace fbsde
