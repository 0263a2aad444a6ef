#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/time_grid.hpp"

namespace fbsde {

enum class StrategyKind { closed_form_candidate, tabulated_rule, derived };
enum class AuditStatus { unaudited, passed, failed };

// Injection process I_i(t_j) of one manager, scalar per path and node.
struct StrategyProcess {
  int player = 1;
  StrategyKind kind = StrategyKind::derived;
  RealPath values;
  AuditStatus audit = AuditStatus::unaudited;
  std::size_t clamped = 0;  // nodes clipped at zero by a tabulated rule

  double operator()(std::size_t path, std::size_t node) const { return values(path, node); }
};

inline void require_player(int player) {
  if (player != 1 && player != 2) throw InvalidArgument("player must be 1 or 2");
}

// I_i(t) = -1/2 e^{beta t} L_i^{-1} p_hat_i(t).
inline StrategyProcess candidate_strategy(int player, const RealPath& p_hat, double weight_l,
                                          double beta, const TimeGrid& grid) {
  require_player(player);
  if (!(weight_l > 0.0)) throw InvalidArgument("candidate_strategy: L_i must be positive");
  if (p_hat.points() != grid.n_nodes() || p_hat.dim() != 1) {
    throw InvalidArgument("candidate_strategy: adjoint path does not match the grid");
  }
  StrategyProcess s;
  s.player = player;
  s.kind = StrategyKind::closed_form_candidate;
  s.values = RealPath(p_hat.paths(), grid.n_nodes(), 1);
  for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
    const double factor = -0.5 * std::exp(beta * grid.time(j)) / weight_l;
    for (std::size_t p = 0; p < p_hat.paths(); ++p) s.values(p, j) = factor * p_hat(p, j);
  }
  return s;
}

// Read-only window on one path of a player's observations, truncated at the
// current node. Reaching past the current node is a contract violation.
class ObservationView {
 public:
  ObservationView(const RealPath& y, std::size_t path, std::size_t node, const TimeGrid& grid)
      : y_(y), path_(path), node_(node), grid_(grid) {}

  std::size_t node() const { return node_; }
  double time() const { return grid_.time(node_); }
  std::size_t dim() const { return y_.dim(); }
  const TimeGrid& grid() const { return grid_; }

  double operator()(std::size_t k, std::size_t comp = 0) const {
    if (k > node_) {
      throw ContractViolation("ObservationView: node " + std::to_string(k) +
                              " lies in the future of node " + std::to_string(node_));
    }
    return y_(path_, k, comp);
  }
  double current(std::size_t comp = 0) const { return y_(path_, node_, comp); }

 private:
  const RealPath& y_;
  std::size_t path_;
  std::size_t node_;
  const TimeGrid& grid_;
};

using InjectionRule = std::function<double(const ObservationView&)>;

// Applies a rule to every path/node of the player's own observations;
// negative outputs are clamped to zero and counted.
inline StrategyProcess tabulated_strategy(int player, const RealPath& own_observations,
                                          const InjectionRule& rule, const TimeGrid& grid) {
  require_player(player);
  if (own_observations.points() != grid.n_nodes()) {
    throw InvalidArgument("tabulated_strategy: observation path does not match the grid");
  }
  StrategyProcess s;
  s.player = player;
  s.kind = StrategyKind::tabulated_rule;
  s.values = RealPath(own_observations.paths(), grid.n_nodes(), 1);
  for (std::size_t p = 0; p < own_observations.paths(); ++p) {
    for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
      double v = rule(ObservationView(own_observations, p, j, grid));
      if (v < 0.0) {
        v = 0.0;
        ++s.clamped;
      }
      s.values(p, j) = v;
    }
  }
  return s;
}

// base + eps * direction, pointwise.
inline StrategyProcess perturbed(const StrategyProcess& base, double eps, const RealPath& direction) {
  if (!base.values.same_layout(direction)) {
    throw InvalidArgument("perturbed: direction " + shape_of(direction) + " vs strategy " +
                          shape_of(base.values));
  }
  StrategyProcess s = base;
  s.kind = StrategyKind::derived;
  auto out = s.values.raw();
  auto dir = direction.raw();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps * dir[i];
  return s;
}

inline StrategyProcess scaled(const StrategyProcess& base, double factor) {
  StrategyProcess s = base;
  s.kind = StrategyKind::derived;
  for (double& v : s.values.raw()) v *= factor;
  return s;
}

inline StrategyProcess zero_strategy(int player, std::size_t n_paths, const TimeGrid& grid) {
  require_player(player);
  StrategyProcess s;
  s.player = player;
  s.values = RealPath(n_paths, grid.n_nodes(), 1);
  s.audit = AuditStatus::passed;
  return s;
}

inline StrategyProcess constant_strategy(int player, std::size_t n_paths, const TimeGrid& grid,
                                         double level) {
  StrategyProcess s = zero_strategy(player, n_paths, grid);
  for (double& v : s.values.raw()) v = level;
  return s;
}

}  // namespace fbsde
