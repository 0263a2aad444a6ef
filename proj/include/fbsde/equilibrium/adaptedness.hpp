#pragma once

#include <cstdint>
#include <cstring>

#include "fbsde/core/brownian.hpp"
#include "fbsde/equilibrium/game_run.hpp"
#include "fbsde/game/market.hpp"

namespace fbsde {

struct AdaptednessReport {
  int player = 1;
  std::size_t compared = 0;
  std::size_t mismatches = 0;
  bool passed = false;
};

// Rebuilds the strategy after resampling every noise block except the
// player's own; an F^i-adapted strategy must come out bit-identical.
inline AdaptednessReport audit_adaptedness(const GameScenario& scenario, const PathBundle& bundle,
                                           const MarketState& market, int player,
                                           const StrategyBuilder& builder,
                                           std::uint64_t fresh_seed = 0x5EEDF00Dull) {
  require_player(player);
  const PathBundle other = resample_other_blocks(bundle, static_cast<std::size_t>(player),
                                                 fresh_seed ^ bundle.seed);
  const MarketState other_market = simulate_market(scenario, other);
  const StrategyProcess a = builder(market);
  const StrategyProcess b = builder(other_market);
  AdaptednessReport r;
  r.player = player;
  if (!a.values.same_layout(b.values)) {
    r.compared = 0;
    r.mismatches = 1;
    return r;
  }
  const auto va = a.values.raw();
  const auto vb = b.values.raw();
  r.compared = va.size();
  for (std::size_t i = 0; i < va.size(); ++i) {
    // bitwise: NaN payloads and signed zeros count as differences too
    if (std::memcmp(&va[i], &vb[i], sizeof(double)) != 0) ++r.mismatches;
  }
  r.passed = r.mismatches == 0;
  return r;
}

inline AdaptednessReport audit_adaptedness(const GameRun& run, int player,
                                           const StrategyBuilder& builder) {
  return audit_adaptedness(run.scenario, run.bundle, run.market, player, builder);
}

// Stamps the audit outcome onto a strategy.
inline StrategyProcess with_audit(StrategyProcess s, const AdaptednessReport& r) {
  s.audit = r.passed ? AuditStatus::passed : AuditStatus::failed;
  return s;
}

}  // namespace fbsde
