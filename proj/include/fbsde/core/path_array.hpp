#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fbsde/core/errors.hpp"

namespace fbsde {

struct NodeTag {};
struct StepTag {};

// Dense (path, point, component) array. The tag keeps node-valued paths
// (n_steps + 1 points) and increments (n_steps points) from being mixed up.
template <class Tag>
class PathArray {
 public:
  PathArray() = default;
  PathArray(std::size_t n_paths, std::size_t n_points, std::size_t dim, double fill = 0.0)
      : paths_(n_paths), points_(n_points), dim_(dim), data_(n_paths * n_points * dim, fill) {}

  std::size_t paths() const noexcept { return paths_; }
  std::size_t points() const noexcept { return points_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t path, std::size_t point, std::size_t comp = 0) noexcept {
    return data_[(path * points_ + point) * dim_ + comp];
  }
  double operator()(std::size_t path, std::size_t point, std::size_t comp = 0) const noexcept {
    return data_[(path * points_ + point) * dim_ + comp];
  }

  std::span<double> at(std::size_t path, std::size_t point) noexcept {
    return {data_.data() + (path * points_ + point) * dim_, dim_};
  }
  std::span<const double> at(std::size_t path, std::size_t point) const noexcept {
    return {data_.data() + (path * points_ + point) * dim_, dim_};
  }

  // Component `comp` at a fixed point, gathered across paths.
  std::vector<double> cross_section(std::size_t point, std::size_t comp = 0) const {
    std::vector<double> out(paths_);
    for (std::size_t p = 0; p < paths_; ++p) out[p] = (*this)(p, point, comp);
    return out;
  }

  std::span<const double> raw() const noexcept { return data_; }
  std::span<double> raw() noexcept { return data_; }

  template <class OtherTag>
  bool same_layout(const PathArray<OtherTag>& o) const noexcept {
    return paths_ == o.paths() && points_ == o.points() && dim_ == o.dim();
  }

  friend bool operator==(const PathArray& a, const PathArray& b) noexcept {
    return a.paths_ == b.paths_ && a.points_ == b.points_ && a.dim_ == b.dim_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t paths_ = 0;
  std::size_t points_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Values at grid nodes: n_paths x (n_steps + 1) x dim.
using RealPath = PathArray<NodeTag>;
// Per-step increments: n_paths x n_steps x dim.
using Increments = PathArray<StepTag>;

inline std::string shape_string(std::size_t paths, std::size_t points, std::size_t dim) {
  return "(" + std::to_string(paths) + "x" + std::to_string(points) + "x" + std::to_string(dim) +
         ")";
}

template <class T>
std::string shape_of(const PathArray<T>& a) {
  return shape_string(a.paths(), a.points(), a.dim());
}

// Node path must have exactly one more point than the increments and the
// same path count.
template <class A>
void require_adapted_pair(const RealPath& nodes, const Increments& inc, const A& what) {
  if (nodes.paths() != inc.paths() || nodes.points() != inc.points() + 1) {
    throw InvalidArgument(std::string(what) + ": shape mismatch, nodes " + shape_of(nodes) +
                          " vs increments " + shape_of(inc));
  }
}

}  // namespace fbsde
