#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fbsde/core/errors.hpp"
#include "fbsde/core/parallel.hpp"
#include "fbsde/core/path_array.hpp"
#include "fbsde/core/philox.hpp"
#include "fbsde/core/time_grid.hpp"

namespace fbsde {

inline constexpr std::size_t kBlocks = 3;  // 0: unobserved, 1: player 1, 2: player 2

using BlockDims = std::array<std::size_t, kBlocks>;

// One key per noise block. Re-keying a single block resamples exactly that
// block's noise and nothing else.
struct BundleSeeds {
  std::array<std::uint64_t, kBlocks> block{};

  static BundleSeeds from_master(std::uint64_t seed) {
    BundleSeeds s;
    for (std::size_t k = 0; k < kBlocks; ++k) {
      s.block[k] = splitmix64(seed ^ (0xA5A5A5A5ull * (k + 1)));
    }
    return s;
  }
};

// Standard-normal draws that drive one scenario.
//  dW[k]     observation / stock noise of block k   (n_paths x n_steps x n_k)
//  dWbar[k]  drift (OU) noise of block k            (n_paths x n_steps x n_k)
//  prior[k]  initial-drift normals, row-major n_paths x n_k
struct PathBundle {
  TimeGrid grid{1.0, 2};
  BlockDims dims{};
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  BundleSeeds seeds{};
  std::array<Increments, kBlocks> dW;
  std::array<Increments, kBlocks> dWbar;
  std::array<std::vector<double>, kBlocks> prior;

  double prior_normal(std::size_t block, std::size_t path, std::size_t comp) const {
    return prior[block][path * dims[block] + comp];
  }
};

namespace detail {

enum class NoiseKind : std::uint32_t { observation = 0, drift = 1, prior = 2 };

// Fills dims consecutive normals for (path, step) of one stream.
inline void fill_normals(std::uint64_t block_seed, NoiseKind kind, std::size_t path,
                         std::size_t step, std::span<double> out, double scale) {
  const auto key = Philox4x32::key_from_seed(block_seed);
  for (std::size_t c = 0; c < out.size(); c += 2) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                  static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(c / 2),
                                  static_cast<std::uint32_t>(kind)};
    const auto z = normal_pair(ctr, key);
    out[c] = scale * z[0];
    if (c + 1 < out.size()) out[c + 1] = scale * z[1];
  }
}

}  // namespace detail

inline PathBundle sample_brownian_bundle(const TimeGrid& grid, const BlockDims& dims,
                                         std::size_t n_paths, const BundleSeeds& seeds,
                                         std::uint64_t master_seed = 0) {
  if (dims[0] + dims[1] + dims[2] == 0) {
    throw InvalidArgument("sample_brownian_bundle: total Brownian dimension is zero");
  }
  if (n_paths == 0) throw InvalidArgument("sample_brownian_bundle: n_paths must be >= 1");
  if (n_paths > std::numeric_limits<std::uint32_t>::max() ||
      grid.n_steps() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("sample_brownian_bundle: path or step count exceeds 2^32");
  }

  PathBundle b;
  b.grid = grid;
  b.dims = dims;
  b.n_paths = n_paths;
  b.seed = master_seed;
  b.seeds = seeds;
  const std::size_t n = grid.n_steps();
  const double sqdt = std::sqrt(grid.dt());
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (dims[k] == 0) continue;
    b.dW[k] = Increments(n_paths, n, dims[k]);
    b.dWbar[k] = Increments(n_paths, n, dims[k]);
    b.prior[k].assign(n_paths * dims[k], 0.0);
  }

  parallel_for(n_paths, [&](std::size_t p) {
    for (std::size_t k = 0; k < kBlocks; ++k) {
      if (dims[k] == 0) continue;
      const std::uint64_t key = seeds.block[k];
      for (std::size_t j = 0; j < n; ++j) {
        detail::fill_normals(key, detail::NoiseKind::observation, p, j, b.dW[k].at(p, j), sqdt);
        detail::fill_normals(key, detail::NoiseKind::drift, p, j, b.dWbar[k].at(p, j), sqdt);
      }
      detail::fill_normals(key, detail::NoiseKind::prior, p, 0,
                           std::span<double>(b.prior[k].data() + p * dims[k], dims[k]), 1.0);
    }
  });
  return b;
}

inline PathBundle sample_brownian_bundle(const TimeGrid& grid, const BlockDims& dims,
                                         std::size_t n_paths, std::uint64_t seed) {
  return sample_brownian_bundle(grid, dims, n_paths, BundleSeeds::from_master(seed), seed);
}

// Same bundle with every block except `keep` re-keyed from `fresh_seed`.
inline PathBundle resample_other_blocks(const PathBundle& base, std::size_t keep,
                                        std::uint64_t fresh_seed) {
  BundleSeeds seeds = base.seeds;
  const BundleSeeds fresh = BundleSeeds::from_master(fresh_seed);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (k != keep) seeds.block[k] = fresh.block[k];
  }
  return sample_brownian_bundle(base.grid, base.dims, base.n_paths, seeds, base.seed);
}

}  // namespace fbsde
