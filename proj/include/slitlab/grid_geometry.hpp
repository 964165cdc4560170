#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

#include "slitlab/common.hpp"

namespace slitlab {

// A window of the global cell lattice of spacing h: cell m covers
// [m h, (m+1) h] per axis and its center sits at (m + 1/2) h. Windows are
// always snapped to this lattice so that fields sampled at the same h align.
struct GridGeometry {
  int n = 0;
  double h = 0.0;
  std::array<std::int64_t, kMaxDim> first{};  // lattice index of the first cell per axis
  std::array<std::int64_t, kMaxDim> dims{};

  static GridGeometry covering(const Box& window, double h) {
    require(h > 0.0, "grid: spacing must be positive");
    GridGeometry g;
    g.n = window.dim();
    require(g.n >= 1 && g.n <= kMaxDim, "grid: unsupported dimension");
    g.h = h;
    for (int i = 0; i < g.n; ++i) {
      const auto lo = static_cast<std::int64_t>(std::floor(window.lo[i] / h + 1e-9));
      auto hi = static_cast<std::int64_t>(std::ceil(window.hi[i] / h - 1e-9));
      if (hi < lo) hi = lo;
      g.first[i] = lo;
      g.dims[i] = hi - lo;
    }
    return g;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(dims[i]);
    return s;
  }

  Box box() const {
    Box b;
    for (int i = 0; i < n; ++i) {
      b.lo.push_back(static_cast<double>(first[i]) * h);
      b.hi.push_back(static_cast<double>(first[i] + dims[i]) * h);
    }
    return b;
  }

  // Lexicographic order: axis 0 slowest, axis n-1 fastest.
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int i = n - 1; i > axis; --i) s *= static_cast<std::size_t>(dims[i]);
    return s;
  }

  void unravel(std::size_t idx, std::array<std::int64_t, kMaxDim>& local) const {
    for (int i = n - 1; i >= 0; --i) {
      local[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(dims[i]));
      idx /= static_cast<std::size_t>(dims[i]);
    }
  }

  std::size_t ravel(const std::array<std::int64_t, kMaxDim>& local) const {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(local[i]);
    return idx;
  }

  SmallPoint center(std::size_t idx) const {
    std::array<std::int64_t, kMaxDim> local{};
    unravel(idx, local);
    SmallPoint p(n);
    for (int i = 0; i < n; ++i) p[i] = (static_cast<double>(first[i] + local[i]) + 0.5) * h;
    return p;
  }

  // Local index of the cell containing coordinate v on `axis`, or -1 outside.
  std::int64_t locate(int axis, double v) const {
    const auto m = static_cast<std::int64_t>(std::floor(v / h)) - first[axis];
    return (m < 0 || m >= dims[axis]) ? -1 : m;
  }

  // Linear index of the cell containing p, or -1 if p is outside the window.
  std::int64_t find(std::span<const double> p) const {
    std::array<std::int64_t, kMaxDim> local{};
    for (int i = 0; i < n; ++i) {
      local[i] = locate(i, p[i]);
      if (local[i] < 0) return -1;
    }
    return static_cast<std::int64_t>(ravel(local));
  }

  double cell_volume() const { return std::pow(h, n); }
};

}  // namespace slitlab
