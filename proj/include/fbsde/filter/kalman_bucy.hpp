#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/ito.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/time_grid.hpp"
#include "fbsde/filter/models.hpp"
#include "fbsde/filter/riccati.hpp"

namespace fbsde {

namespace detail {

inline void require_grid(const Increments& d, const TimeGrid& grid, const char* what) {
  if (d.points() != grid.n_steps()) {
    throw InvalidArgument(std::string(what) + ": increments have " + std::to_string(d.points()) +
                          " steps, grid has " + std::to_string(grid.n_steps()));
  }
}

inline void require_grid(const RealPath& x, const TimeGrid& grid, const char* what) {
  if (x.points() != grid.n_nodes()) {
    throw InvalidArgument(std::string(what) + ": path has " + std::to_string(x.points()) +
                          " nodes, grid has " + std::to_string(grid.n_nodes()));
  }
}

// log e^{-int_0^t r ds} on the grid, left-endpoint sums.
inline std::vector<double> log_discount(const ShortRate& rate, const TimeGrid& grid) {
  std::vector<double> out(grid.n_nodes(), 0.0);
  for (std::size_t j = 0; j < grid.n_steps(); ++j) {
    out[j + 1] = out[j] - rate(grid.time(j)) * grid.dt();
  }
  return out;
}

}  // namespace detail

// Euler path of d mu = theta(delta - mu) dt + zeta dWbar started from the
// given initial values (row-major n_paths x n).
inline RealPath simulate_ou_drift(const OUParams& params, const Increments& dWbar,
                                  const TimeGrid& grid, std::span<const double> initial) {
  params.validate("simulate_ou_drift");
  detail::require_grid(dWbar, grid, "simulate_ou_drift");
  const auto n = static_cast<std::size_t>(params.dim());
  if (dWbar.dim() != n) throw InvalidArgument("simulate_ou_drift: noise dimension mismatch");
  if (initial.size() != dWbar.paths() * n) {
    throw InvalidArgument("simulate_ou_drift: initial values have the wrong size");
  }
  const double dt = grid.dt();
  RealPath mu(dWbar.paths(), grid.n_nodes(), n);
  parallel_for(dWbar.paths(), [&](std::size_t p) {
    for (std::size_t c = 0; c < n; ++c) mu(p, 0, c) = initial[p * n + c];
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      for (std::size_t c = 0; c < n; ++c) {
        double noise = 0.0;
        for (std::size_t l = 0; l < n; ++l) noise += params.zeta(c, l) * dWbar(p, j, l);
        mu(p, j + 1, c) = mu(p, j, c) + params.theta(c) * (params.delta(c) - mu(p, j, c)) * dt + noise;
      }
    }
  });
  return mu;
}

// Started from the deterministic prior mean m0.
inline RealPath simulate_ou_drift(const OUParams& params, const Increments& dWbar,
                                  const TimeGrid& grid) {
  std::vector<double> init(dWbar.paths() * static_cast<std::size_t>(params.dim()));
  for (std::size_t p = 0; p < dWbar.paths(); ++p) {
    for (Eigen::Index c = 0; c < params.dim(); ++c) {
      init[p * params.dim() + c] = params.m0(c);
    }
  }
  return simulate_ou_drift(params, dWbar, grid, init);
}

// eta = Sigma^{-1}(mu - A/2) at every node.
inline RealPath observation_drift(const RealPath& mu, const ObservationModel& obs) {
  const auto n = static_cast<std::size_t>(obs.dim());
  if (mu.dim() != n) throw InvalidArgument("observation_drift: dimension mismatch");
  RealPath eta(mu.paths(), mu.points(), n);
  const Matrix& h = obs.sigma_inv();
  const Vector& a = obs.a_diag();
  for (std::size_t p = 0; p < mu.paths(); ++p) {
    for (std::size_t j = 0; j < mu.points(); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += h(i, l) * (mu(p, j, l) - 0.5 * a(l));
        eta(p, j, i) = s;
      }
    }
  }
  return eta;
}

// Y(0) = 0, dY = eta(t_j) dt + dW_j.
inline RealPath synthesize_observations(const RealPath& mu, const ObservationModel& obs,
                                        const Increments& dW, const TimeGrid& grid) {
  detail::require_grid(mu, grid, "synthesize_observations");
  detail::require_grid(dW, grid, "synthesize_observations");
  require_adapted_pair(mu, dW, "synthesize_observations");
  if (mu.dim() != dW.dim()) throw InvalidArgument("synthesize_observations: dimension mismatch");
  const RealPath eta = observation_drift(mu, obs);
  const double dt = grid.dt();
  RealPath y(dW.paths(), grid.n_nodes(), dW.dim());
  for (std::size_t p = 0; p < dW.paths(); ++p) {
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      for (std::size_t c = 0; c < dW.dim(); ++c) {
        y(p, j + 1, c) = y(p, j, c) + eta(p, j, c) * dt + dW(p, j, c);
      }
    }
  }
  return y;
}

// Euler on log S: d log S_i = (mu_i - a_ii/2) dt + (Sigma dW)_i, log S(0) = 0.
inline RealPath simulate_log_stocks(const RealPath& mu, const ObservationModel& obs,
                                    const Increments& dW, const TimeGrid& grid) {
  detail::require_grid(mu, grid, "simulate_log_stocks");
  detail::require_grid(dW, grid, "simulate_log_stocks");
  require_adapted_pair(mu, dW, "simulate_log_stocks");
  const auto n = static_cast<std::size_t>(obs.dim());
  if (mu.dim() != n || dW.dim() != n) throw InvalidArgument("simulate_log_stocks: dimension mismatch");
  const double dt = grid.dt();
  RealPath log_s(dW.paths(), grid.n_nodes(), n);
  for (std::size_t p = 0; p < dW.paths(); ++p) {
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double noise = 0.0;
        for (std::size_t l = 0; l < n; ++l) noise += obs.sigma()(i, l) * dW(p, j, l);
        log_s(p, j + 1, i) = log_s(p, j, i) + (mu(p, j, i) - 0.5 * obs.a_diag()(i)) * dt + noise;
      }
    }
  }
  return log_s;
}

// dY = Sigma^{-1} d log S, Y(0) = 0.
inline RealPath stocks_to_observations(const RealPath& log_stocks, const ObservationModel& obs) {
  const auto n = static_cast<std::size_t>(obs.dim());
  if (log_stocks.dim() != n) throw InvalidArgument("stocks_to_observations: dimension mismatch");
  const Matrix& h = obs.sigma_inv();
  RealPath y(log_stocks.paths(), log_stocks.points(), n);
  for (std::size_t p = 0; p < log_stocks.paths(); ++p) {
    for (std::size_t j = 0; j + 1 < log_stocks.points(); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          s += h(i, l) * (log_stocks(p, j + 1, l) - log_stocks(p, j, l));
        }
        y(p, j + 1, i) = y(p, j, i) + s;
      }
    }
  }
  return y;
}

struct FilterOutput {
  RealPath mean;              // conditional mean of the drift
  CovariancePath covariance;  // Riccati error covariance
  Increments innovation;      // dY - eta_hat dt
  RealPath eta_hat;           // Sigma^{-1}(mu_hat - A/2)
};

// Euler-Maruyama Kalman-Bucy filter:
//   d mu_hat = theta(delta - mu_hat) dt + P (Sigma^{-1})^T dW_hat,
//   dW_hat   = dY - Sigma^{-1}(mu_hat - A/2) dt,   mu_hat(0) = m0.
inline FilterOutput run_kalman_bucy(const RealPath& y, const OUParams& params,
                                    const ObservationModel& obs, const CovariancePath& cov,
                                    const TimeGrid& grid) {
  params.validate("run_kalman_bucy");
  detail::require_grid(y, grid, "run_kalman_bucy");
  if (cov.size() != grid.n_nodes()) {
    throw InvalidArgument("run_kalman_bucy: covariance path has " + std::to_string(cov.size()) +
                          " nodes, observation grid has " + std::to_string(grid.n_nodes()));
  }
  const auto n = static_cast<std::size_t>(params.dim());
  if (y.dim() != n || static_cast<std::size_t>(obs.dim()) != n) {
    throw InvalidArgument("run_kalman_bucy: dimension mismatch");
  }
  const double dt = grid.dt();
  const Matrix& h = obs.sigma_inv();
  const Vector& a = obs.a_diag();
  std::vector<Matrix> gains(grid.n_steps());
  for (std::size_t j = 0; j < grid.n_steps(); ++j) gains[j] = cov[j] * h.transpose();

  FilterOutput out;
  out.covariance = cov;
  out.mean = RealPath(y.paths(), grid.n_nodes(), n);
  out.eta_hat = RealPath(y.paths(), grid.n_nodes(), n);
  out.innovation = Increments(y.paths(), grid.n_steps(), n);
  parallel_for(y.paths(), [&](std::size_t p) {
    std::vector<double> innov(n);
    for (std::size_t c = 0; c < n; ++c) out.mean(p, 0, c) = params.m0(c);
    for (std::size_t j = 0;; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += h(i, l) * (out.mean(p, j, l) - 0.5 * a(l));
        out.eta_hat(p, j, i) = s;
      }
      if (j == grid.n_steps()) break;
      for (std::size_t i = 0; i < n; ++i) {
        innov[i] = (y(p, j + 1, i) - y(p, j, i)) - out.eta_hat(p, j, i) * dt;
        out.innovation(p, j, i) = innov[i];
      }
      for (std::size_t c = 0; c < n; ++c) {
        double correction = 0.0;
        for (std::size_t l = 0; l < n; ++l) correction += gains[j](c, l) * innov[l];
        const double m = out.mean(p, j, c);
        out.mean(p, j + 1, c) = m + params.theta(c) * (params.delta(c) - m) * dt + correction;
      }
    }
  });
  return out;
}

// b_hat = Sigma^{-1}(mu_hat - r(t) 1) at every node.
inline RealPath filtered_b(const RealPath& mu_hat, const ObservationModel& obs,
                           const TimeGrid& grid) {
  detail::require_grid(mu_hat, grid, "filtered_b");
  const auto n = static_cast<std::size_t>(obs.dim());
  if (mu_hat.dim() != n) throw InvalidArgument("filtered_b: dimension mismatch");
  const Matrix& h = obs.sigma_inv();
  RealPath b(mu_hat.paths(), mu_hat.points(), n);
  for (std::size_t j = 0; j < mu_hat.points(); ++j) {
    const double r = obs.rate(grid.time(j));
    for (std::size_t p = 0; p < mu_hat.paths(); ++p) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += h(i, l) * (mu_hat(p, j, l) - r);
        b(p, j, i) = s;
      }
    }
  }
  return b;
}

// Closed form p_hat(t) = -M exp{ int(-r - |b_hat|^2/2) ds - int b_hat dW_hat }.
inline RealPath filtered_adjoint(const RealPath& b_hat, const ObservationModel& obs,
                                 double terminal_weight, const Increments& innovation,
                                 const TimeGrid& grid) {
  if (!(terminal_weight > 0.0)) throw InvalidArgument("filtered_adjoint: M must be positive");
  detail::require_grid(innovation, grid, "filtered_adjoint");
  RealPath log_p = detail::log_stochastic_exponential(b_hat, innovation, -1, grid.dt());
  const auto log_disc = detail::log_discount(obs.short_rate(), grid);
  for (std::size_t p = 0; p < log_p.paths(); ++p) {
    for (std::size_t j = 0; j < log_p.points(); ++j) {
      log_p(p, j) = -terminal_weight * std::exp(log_p(p, j) + log_disc[j]);
    }
  }
  return log_p;
}

// Euler scheme of dp = -r p dt - b_hat^T p dW_hat, p(0) = -M. Scheme check only.
inline RealPath filtered_adjoint_euler(const RealPath& b_hat, const ObservationModel& obs,
                                       double terminal_weight, const Increments& innovation,
                                       const TimeGrid& grid) {
  if (!(terminal_weight > 0.0)) throw InvalidArgument("filtered_adjoint: M must be positive");
  detail::require_grid(innovation, grid, "filtered_adjoint_euler");
  require_adapted_pair(b_hat, innovation, "filtered_adjoint_euler");
  const double dt = grid.dt();
  RealPath p_hat(b_hat.paths(), grid.n_nodes(), 1);
  for (std::size_t p = 0; p < b_hat.paths(); ++p) {
    p_hat(p, 0) = -terminal_weight;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < b_hat.dim(); ++c) dot += b_hat(p, j, c) * innovation(p, j, c);
      const double cur = p_hat(p, j);
      p_hat(p, j + 1) = cur - obs.rate(grid.time(j)) * cur * dt - dot * cur;
    }
  }
  return p_hat;
}

}  // namespace fbsde
