#pragma once

#include <cmath>
#include <cstddef>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/time_grid.hpp"

namespace fbsde {

// Componentwise left-endpoint Ito sums: out(k) = sum_{j<k} f(t_j) dW_j.
inline RealPath ito_integral(const RealPath& integrand, const Increments& dW) {
  require_adapted_pair(integrand, dW, "ito_integral");
  if (integrand.dim() != dW.dim()) {
    throw InvalidArgument("ito_integral: integrand dim " + std::to_string(integrand.dim()) +
                          " != increment dim " + std::to_string(dW.dim()));
  }
  RealPath out(dW.paths(), dW.points() + 1, dW.dim());
  parallel_for(dW.paths(), [&](std::size_t p) {
    for (std::size_t j = 0; j < dW.points(); ++j) {
      for (std::size_t c = 0; c < dW.dim(); ++c) {
        out(p, j + 1, c) = out(p, j, c) + integrand(p, j, c) * dW(p, j, c);
      }
    }
  });
  return out;
}

namespace detail {

// log of exp{ sign * sum b.dW - 1/2 sum |b|^2 dt }, accumulated per path.
inline RealPath log_stochastic_exponential(const RealPath& b, const Increments& dW, int sign,
                                           double dt) {
  require_adapted_pair(b, dW, "stochastic_exponential");
  if (b.dim() != dW.dim()) {
    throw InvalidArgument("stochastic_exponential: integrand dim " + std::to_string(b.dim()) +
                          " != increment dim " + std::to_string(dW.dim()));
  }
  if (sign != 1 && sign != -1) throw InvalidArgument("stochastic_exponential: sign must be +-1");
  RealPath log_e(dW.paths(), dW.points() + 1, 1);
  parallel_for(dW.paths(), [&](std::size_t p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dW.points(); ++j) {
      double dot = 0.0;
      double sq = 0.0;
      for (std::size_t c = 0; c < dW.dim(); ++c) {
        const double bc = b(p, j, c);
        dot += bc * dW(p, j, c);
        sq += bc * bc;
      }
      acc += sign * dot - 0.5 * sq * dt;
      log_e(p, j + 1) = acc;
    }
  });
  return log_e;
}

inline RealPath exponentiate(RealPath log_values) {
  for (double& v : log_values.raw()) v = std::exp(v);
  return log_values;
}

}  // namespace detail

// exp{ sign * int b.dW - 1/2 int |b|^2 dt } with left-endpoint sums; node 0 = 1.
inline RealPath stochastic_exponential(const RealPath& b, const Increments& dW, int sign,
                                       double dt) {
  return detail::exponentiate(detail::log_stochastic_exponential(b, dW, sign, dt));
}

inline RealPath stochastic_exponential(const TimeGrid& grid, const RealPath& b,
                                       const Increments& dW, int sign) {
  if (dW.points() != grid.n_steps()) {
    throw InvalidArgument("stochastic_exponential: increments do not match the grid");
  }
  return stochastic_exponential(b, dW, sign, grid.dt());
}

// Girsanov density Z = exp{ sum_j int h_j dY_j - 1/2 sum_j int h_j^2 ds }.
inline RealPath girsanov_weight(const RealPath& h, const Increments& dY, double dt) {
  return stochastic_exponential(h, dY, +1, dt);
}

inline RealPath girsanov_weight(const TimeGrid& grid, const RealPath& h, const Increments& dY) {
  return stochastic_exponential(grid, h, dY, +1);
}

// Node-to-node differences of a path.
inline Increments increments_of(const RealPath& x) {
  if (x.points() < 2) throw InvalidArgument("increments_of: path has fewer than 2 nodes");
  Increments d(x.paths(), x.points() - 1, x.dim());
  for (std::size_t p = 0; p < x.paths(); ++p) {
    for (std::size_t j = 0; j + 1 < x.points(); ++j) {
      for (std::size_t c = 0; c < x.dim(); ++c) d(p, j, c) = x(p, j + 1, c) - x(p, j, c);
    }
  }
  return d;
}

// Cumulative sums of increments, starting at 0.
inline RealPath cumulate(const Increments& d) {
  RealPath x(d.paths(), d.points() + 1, d.dim());
  for (std::size_t p = 0; p < d.paths(); ++p) {
    for (std::size_t j = 0; j < d.points(); ++j) {
      for (std::size_t c = 0; c < d.dim(); ++c) x(p, j + 1, c) = x(p, j, c) + d(p, j, c);
    }
  }
  return x;
}

}  // namespace fbsde
