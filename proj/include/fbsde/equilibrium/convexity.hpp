#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fbsde/game/hamiltonian.hpp"
#include "fbsde/game/scenario.hpp"

namespace fbsde {

inline constexpr double kConvexityTolerance = 1e-10;

struct SegmentProbe {
  std::vector<double> origin;
  std::vector<double> direction;
};

struct ConvexityReport {
  std::string label;
  std::size_t probes = 0;
  std::size_t differences = 0;
  std::size_t violations = 0;
  double min_second_difference = INFINITY;
  bool pass = false;
};

using ScalarField = std::function<double(const std::vector<double>&)>;

// Second differences f(x - h d) - 2 f(x) + f(x + h d) at `points` interior
// nodes of each sampled segment.
inline ConvexityReport convexity_along_segments(const std::string& label, const ScalarField& f,
                                                const std::vector<SegmentProbe>& segments,
                                                std::size_t points = 5,
                                                double tolerance = kConvexityTolerance) {
  ConvexityReport r;
  r.label = label;
  r.probes = segments.size();
  for (const auto& seg : segments) {
    if (seg.origin.size() != seg.direction.size()) {
      throw InvalidArgument("convexity: segment origin and direction differ in length");
    }
    auto at = [&](double s) {
      std::vector<double> x(seg.origin);
      for (std::size_t c = 0; c < x.size(); ++c) x[c] += s * seg.direction[c];
      return f(x);
    };
    const double h = 1.0 / static_cast<double>(points + 1);
    for (std::size_t k = 1; k <= points; ++k) {
      const double s = static_cast<double>(k) * h;
      const double d2 = at(s - h) - 2.0 * at(s) + at(s + h);
      r.min_second_difference = std::min(r.min_second_difference, d2);
      ++r.differences;
      if (d2 < -tolerance) ++r.violations;
    }
  }
  r.pass = r.violations == 0 && r.differences > 0;
  return r;
}

// Coordinates of the investment-game Hamiltonian that vary along a segment:
// (y, z^0, z^1, z^2, I_1, I_2). t, b^k, p_i and r stay at the probe's values.
struct ExampleChart {
  ExampleHamiltonianPoint frame;
  BlockDims dims{};

  std::size_t size() const { return 1 + dims[0] + dims[1] + dims[2] + 2; }

  ExampleHamiltonianPoint point(const std::vector<double>& x) const {
    ExampleHamiltonianPoint out = frame;
    std::size_t c = 0;
    out.y = x[c++];
    for (std::size_t k = 0; k < kBlocks; ++k) {
      out.z[k].assign(dims[k], 0.0);
      for (std::size_t i = 0; i < dims[k]; ++i) out.z[k][i] = x[c++];
    }
    out.injection1 = x[c++];
    out.injection2 = x[c++];
    return out;
  }
  std::size_t injection_index(int player) const { return size() - (player == 1 ? 2 : 1); }
};

using ExampleHamiltonian =
    std::function<double(const ExampleHamiltonianPoint&, int player, double weight_l, double beta)>;

// Negates the quadratic control term: a concave sanity fixture.
inline double concave_example_hamiltonian(const ExampleHamiltonianPoint& x, int player,
                                          double weight_l, double beta) {
  const double own = player == 1 ? x.injection1 : x.injection2;
  return hamiltonian_example(x, player, weight_l, beta) -
         2.0 * weight_l * std::exp(-beta * x.t) * own * own;
}

enum class SegmentKind { own_injection, other_injection, wealth, martingale, joint };

inline const char* segment_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::own_injection: return "own_injection";
    case SegmentKind::other_injection: return "other_injection";
    case SegmentKind::wealth: return "y";
    case SegmentKind::martingale: return "z";
    case SegmentKind::joint: return "joint";
  }
  return "?";
}

struct ConvexityResult {
  std::vector<ConvexityReport> reports;  // per player and segment kind
  bool pass = false;
};

// Random probes (t, y, z, b, I, p, r) drawn around the scenario's scale,
// with segments of each kind for both players.
inline ConvexityResult convexity_check(const GameScenario& scenario, std::size_t n_probes,
                                       std::uint64_t seed = 7,
                                       const ExampleHamiltonian& hamiltonian = hamiltonian_example) {
  if (n_probes == 0) throw InvalidArgument("convexity_check: n_probes must be positive");
  const BlockDims dims = scenario.dims();
  const double horizon = scenario.grid.horizon();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;

  ConvexityResult out;
  out.pass = true;
  for (int player : {1, 2}) {
    const double weight_l = scenario.cost.L(player);
    const double beta = scenario.cost.beta;
    for (SegmentKind kind : {SegmentKind::own_injection, SegmentKind::other_injection,
                             SegmentKind::wealth, SegmentKind::martingale, SegmentKind::joint}) {
      std::vector<SegmentProbe> segments;
      std::vector<ExampleChart> charts;
      for (std::size_t n = 0; n < n_probes; ++n) {
        ExampleChart chart;
        chart.dims = dims;
        chart.frame.t = horizon * unit(rng);
        chart.frame.r = scenario.rate + 0.01 * normal(rng);
        chart.frame.p = -scenario.cost.M(player) * std::exp(0.5 * normal(rng));
        for (std::size_t k = 0; k < kBlocks; ++k) {
          chart.frame.b[k].resize(dims[k]);
          for (double& v : chart.frame.b[k]) v = normal(rng);
        }
        SegmentProbe seg;
        seg.origin.resize(chart.size());
        seg.direction.assign(chart.size(), 0.0);
        for (double& v : seg.origin) v = normal(rng);
        seg.origin[chart.size() - 2] = std::abs(seg.origin[chart.size() - 2]);
        seg.origin[chart.size() - 1] = std::abs(seg.origin[chart.size() - 1]);
        switch (kind) {
          case SegmentKind::own_injection:
            seg.direction[chart.injection_index(player)] = 1.0 + unit(rng);
            break;
          case SegmentKind::other_injection:
            seg.direction[chart.injection_index(3 - player)] = 1.0 + unit(rng);
            break;
          case SegmentKind::wealth:
            seg.direction[0] = normal(rng);
            break;
          case SegmentKind::martingale:
            for (std::size_t c = 1; c < chart.size() - 2; ++c) seg.direction[c] = normal(rng);
            break;
          case SegmentKind::joint:
            for (double& v : seg.direction) v = normal(rng);
            break;
        }
        segments.push_back(std::move(seg));
        charts.push_back(std::move(chart));
      }
      // each segment carries its own frame; evaluate them one at a time
      ConvexityReport merged;
      merged.label = "player" + std::to_string(player) + "/" + segment_name(kind);
      for (std::size_t n = 0; n < segments.size(); ++n) {
        const ExampleChart& chart = charts[n];
        const ScalarField f = [&](const std::vector<double>& x) {
          return hamiltonian(chart.point(x), player, weight_l, beta);
        };
        const auto one = convexity_along_segments(merged.label, f, {segments[n]});
        merged.probes += one.probes;
        merged.differences += one.differences;
        merged.violations += one.violations;
        merged.min_second_difference = std::min(merged.min_second_difference, one.min_second_difference);
      }
      merged.pass = merged.violations == 0;
      out.pass = out.pass && merged.pass;
      out.reports.push_back(std::move(merged));
    }
  }
  return out;
}

}  // namespace fbsde
