#pragma once

#include <cmath>
#include <vector>

#include "fbsde/core/statistics.hpp"
#include "fbsde/filter/kalman_bucy.hpp"
#include "fbsde/filter/riccati.hpp"

namespace fbsde {

// One entry (i, j), i <= j, of the filter error covariance at a probe node.
struct CovarianceEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double empirical = 0.0;  // sample mean of e_i e_j, e = mu - mu_hat
  double std_error = 0.0;
  double riccati = 0.0;
  double z = 0.0;
};

struct ConsistencyProbe {
  std::size_t node = 0;
  double t = 0.0;
  std::vector<double> error_mean;
  std::vector<CovarianceEntry> entries;
};

struct FilterConsistency {
  std::vector<ConsistencyProbe> probes;
  double max_abs_z = 0.0;
  bool pass = false;
};

inline double z_score(double estimate, double reference, double std_error) {
  const double gap = estimate - reference;
  if (std_error > 0.0) return gap / std_error;
  return std::abs(gap) <= 1e-12 * (1.0 + std::abs(reference)) ? 0.0 : std::copysign(INFINITY, gap);
}

// Compares the empirical second moment of the filter error with the
// Riccati covariance at each probe node.
inline FilterConsistency filter_consistency(const RealPath& mu, const FilterOutput& filter,
                                            const CovariancePath& cov, const TimeGrid& grid,
                                            const std::vector<std::size_t>& nodes,
                                            double z_limit = 5.0) {
  if (!mu.same_layout(filter.mean)) {
    throw InvalidArgument("filter_consistency: true drift " + shape_of(mu) + " vs filter mean " +
                          shape_of(filter.mean));
  }
  detail::require_grid(mu, grid, "filter_consistency");
  const std::size_t n = mu.paths();
  const std::size_t d = mu.dim();
  FilterConsistency out;
  out.pass = true;
  std::vector<double> buf(n);
  for (std::size_t node : nodes) {
    if (node >= mu.points()) throw InvalidArgument("filter_consistency: probe node out of range");
    ConsistencyProbe probe;
    probe.node = node;
    probe.t = grid.time(node);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t p = 0; p < n; ++p) buf[p] = mu(p, node, i) - filter.mean(p, node, i);
      probe.error_mean.push_back(estimate_mean(buf).mean);
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        for (std::size_t p = 0; p < n; ++p) {
          buf[p] = (mu(p, node, i) - filter.mean(p, node, i)) * (mu(p, node, j) - filter.mean(p, node, j));
        }
        const auto e = estimate_mean(buf);
        CovarianceEntry c;
        c.i = i;
        c.j = j;
        c.empirical = e.mean;
        c.std_error = e.std_error;
        c.riccati = cov.nodes[node](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        c.z = z_score(c.empirical, c.riccati, c.std_error);
        out.max_abs_z = std::max(out.max_abs_z, std::abs(c.z));
        if (!(std::abs(c.z) <= z_limit)) out.pass = false;
        probe.entries.push_back(c);
      }
    }
    out.probes.push_back(std::move(probe));
  }
  return out;
}

// Innovation increments pooled over paths and steps should look like dt-variance
// Brownian increments.
struct InnovationStats {
  double mean = 0.0;
  double variance = 0.0;
  double mean_bound = 0.0;      // 4 sqrt(dt / N)
  double variance_bound = 0.0;  // 5 dt sqrt(2 / N)
  std::size_t count = 0;
  bool pass = false;
};

inline InnovationStats innovation_stats(const Increments& innovation, double dt) {
  const auto raw = innovation.raw();
  InnovationStats s;
  s.count = raw.size();
  if (s.count < 2) throw InvalidArgument("innovation_stats: need at least two increments");
  s.mean = pairwise_sum(raw) / static_cast<double>(s.count);
  s.variance = sample_variance(raw);
  const double nn = static_cast<double>(s.count);
  s.mean_bound = 4.0 * std::sqrt(dt / nn);
  s.variance_bound = 5.0 * dt * std::sqrt(2.0 / nn);
  s.pass = std::abs(s.mean) <= s.mean_bound && std::abs(s.variance - dt) <= s.variance_bound;
  return s;
}

}  // namespace fbsde
