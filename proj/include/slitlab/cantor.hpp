#pragma once

#include <span>
#include <utility>
#include <vector>

#include "slitlab/common.hpp"

namespace slitlab {

// Distances to Cantor sets are resolved to this accuracy unless a caller asks
// otherwise; downstream geometry treats anything below it as zero.
inline constexpr double kCantorTol = 0x1p-40;

// A Cantor set on [0, 1] built by keeping the two outer pieces of relative
// length ratio(k) at step k, and its codim-fold product.
//
// Fixed-ratio sets are the attractor K of {x -> lambda x, x -> lambda x + 1 - lambda};
// variable-ratio sets stop at max_depth and all oracles then refer to the
// depth-max_depth interval union.
struct CantorSpec {
  enum class Kind { FixedRatio, VariableRatio };

  Kind kind = Kind::FixedRatio;
  double lambda = 0.25;
  std::vector<double> ratios;
  int codim = 1;
  int max_depth = 64;

  static CantorSpec fixed(double lambda, int codim = 1, int max_depth = 64);
  static CantorSpec variable(std::vector<double> ratios, int codim = 1);

  // Child ratio applied when going from level `level` to level + 1.
  double ratio(int level) const {
    return kind == Kind::FixedRatio ? lambda : ratios[static_cast<std::size_t>(level)];
  }
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// dist(x, K) to within tol by descending the construction tree.
double k_distance(double x, const CantorSpec& spec, double tol = kCantorTol);

// Euclidean distance to the product set C = K^codim; coordinates decouple.
double c_distance(std::span<const double> x, const CantorSpec& spec, double tol = kCantorTol);

// Hausdorff dimension of C_lambda = K_lambda^(n-1).
double cantor_dim(const CantorSpec& spec, int n);

// Variable-ratio set removing the middle proportion 1/(k+2) at step k = 1..depth:
// Lebesgue measure tends to 0 while dimension tends to 1.
CantorSpec fat_thin_cantor(int depth);

// Membership in the depth-`depth` interval union (depth clamped to max_depth).
bool k_member(double x, const CantorSpec& spec, int depth);

// The 2^depth construction intervals at the given depth, left to right.
std::vector<Interval> construction_intervals(const CantorSpec& spec, int depth);

// Left endpoints of the depth-`depth` intervals; these are points of K.
std::vector<double> construction_corners(const CantorSpec& spec, int depth);

// Lower-left corners of the depth-`depth` cells of C = K^codim, lexicographic.
std::vector<Point> product_corners(const CantorSpec& spec, int depth);

double retained_measure(const CantorSpec& spec, int depth);

// Box-dimension estimate from the construction covers at depths d-1 and d:
// log(N_d / N_{d-1}) / log(l_{d-1} / l_d), the finest available local slope.
double box_dimension_estimate(const CantorSpec& spec, int depth);

}  // namespace slitlab
