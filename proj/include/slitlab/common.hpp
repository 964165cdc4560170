#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slitlab {

// Ambient dimensions supported by the fixed-capacity point type.
inline constexpr int kMaxDim = 4;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

// Stack storage for a point of runtime dimension <= kMaxDim.
struct SmallPoint {
  std::array<double, kMaxDim> x{};
  int n = 0;

  SmallPoint() = default;
  explicit SmallPoint(int dim) : n(dim) {}
  explicit SmallPoint(std::span<const double> p) : n(static_cast<int>(p.size())) {
    for (int i = 0; i < n; ++i) x[i] = p[i];
  }
  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
  std::span<const double> span() const { return {x.data(), static_cast<std::size_t>(n)}; }
  std::span<double> span() { return {x.data(), static_cast<std::size_t>(n)}; }
};

// Axis-aligned box [lo, hi] in R^n.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> p) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }
  Box inflated(double d) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] -= d;
      b.hi[i] += d;
    }
    return b;
  }
};

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Euclidean distance from p to the box (0 inside).
inline double distance_to_box(std::span<const double> p, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    double d = 0.0;
    if (p[i] < b.lo[i]) d = b.lo[i] - p[i];
    else if (p[i] > b.hi[i]) d = p[i] - b.hi[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace slitlab
