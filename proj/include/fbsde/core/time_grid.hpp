#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "fbsde/core/errors.hpp"

namespace fbsde {

// Uniform discretisation of [0, T]. Node k sits at t_k = k * dt.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw InvalidArgument("TimeGrid: horizon must be positive and finite, got " +
                            std::to_string(horizon));
    }
    if (n_steps < 2) {
      throw InvalidArgument("TimeGrid: need at least 2 steps, got " + std::to_string(n_steps));
    }
    dt_ = horizon / static_cast<double>(n_steps);
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return dt_; }

  double time(std::size_t k) const noexcept {
    // the last node is pinned to T so that t_N == T exactly
    return k == n_steps_ ? horizon_ : static_cast<double>(k) * dt_;
  }

  // Index of the node closest to t, clamped to the grid.
  std::size_t nearest_step(double t) const noexcept {
    if (t <= 0.0) return 0;
    if (t >= horizon_) return n_steps_;
    return static_cast<std::size_t>(std::lround(t / dt_));
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.horizon_ == b.horizon_ && a.n_steps_ == b.n_steps_;
  }

 private:
  double horizon_;
  std::size_t n_steps_;
  double dt_;
};

inline TimeGrid make_time_grid(double horizon, std::size_t n_steps) {
  return TimeGrid(horizon, n_steps);
}

}  // namespace fbsde
