#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slitlab/cantor.hpp"
#include "slitlab/common.hpp"
#include "slitlab/grid_geometry.hpp"

namespace slitlab {

// The slit domains and their pieces. The last two coordinates carry the planar
// picture; leading coordinates range over (0,1) (or [0,1] for N).
//
//   D        = (0,1)^{n-2} x ((-2,1) x (-3/2,3/2) \ [-1,0] x [-1,1])
//   N        = {x' in [0,1]^{n-1}, x_n in [-1,1] : |x_n| <= dist(x', C)}
//   Omega    = D \ N
//   Q0       = (0,1)^{n-2} x ((-2,1) x (-3/2,3/2) \ [-1,1] x [-1,1])
//   Omega2   = (-1,1)^2 \ {0 <= x <= 1, |y| <= dist(x, C_fat)}  (x (-1,1)^{n-2})
//
// NLambdaComplement is R^n \ N seen through D's bounding box, the open set the
// complementary Whitney family decomposes. Box is an open box used in tests.
struct RegionSpec {
  enum class Kind { D, NLambda, NLambdaComplement, OmegaLambda, Q0Tilde, Omega2, Omega2Product, Box };

  Kind kind = Kind::OmegaLambda;
  int n = 2;
  CantorSpec cantor;
  Box bbox;
  Box box;  // Kind::Box only

  static RegionSpec make(Kind kind, int n, const CantorSpec& cantor);
  static RegionSpec omega2(int depth, int n = 2);
  static RegionSpec open_box(const Box& b);

  std::string name() const;
};

std::string kind_name(RegionSpec::Kind kind);
RegionSpec::Kind parse_kind(const std::string& name);

struct DistanceBracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Open regions (D, Omega, Q0, Omega2, Box, complement) test strict
// membership; N is closed. Boundary resolution is limited by the Cantor tol.
bool region_membership(const RegionSpec& spec, std::span<const double> x);

// Bounding box of D for the slit kinds (used as the lattice window).
Box d_bbox(int n);

bool has_distance_oracle(const RegionSpec& spec);

// Certified lo <= dist(x, dN) <= hi from the vertical gap to the sheets
// |x_n| = dist(x', C) (1-Lipschitz, hence the 1/sqrt 2 factor) and the flat
// faces x'_i in {0, 1}. Exact for Box.
DistanceBracket boundary_distance(const RegionSpec& spec, std::span<const double> x);

// boundary_distance intersected with the exact planar distance when n = 2
// and the Cantor set is fixed-ratio: N is then the union of the closed squares
// (diamonds) |x - m| + |y| <= w over the gaps of K.
DistanceBracket refined_boundary_distance(const RegionSpec& spec, std::span<const double> x);

// Exact dist((x, y), N) for n = 2 by branch-and-bound over the construction tree.
double planar_distance_to_n(double x, double y, const CantorSpec& spec, double tol = kCantorTol);

// Cells of a lattice window restricted to a ball, labelled by face-connected
// component. Two face neighbours connect only if the midpoint of their centers
// lies in the region as well, which keeps the two slit sides apart where N
// pinches to a Cantor point.
struct ComponentMap {
  GridGeometry grid;
  std::vector<std::int32_t> labels;  // -1 outside ball or region
  int count = 0;
  std::vector<std::int64_t> sizes;   // cell count per label

  std::int32_t label_at(std::span<const double> p) const {
    const std::int64_t idx = grid.find(p);
    return idx < 0 ? -1 : labels[static_cast<std::size_t>(idx)];
  }
  // Label of the component with a cell closest to `p` on the side sign(x_n - p_n) = side.
  std::int32_t side_label(std::span<const double> p, int side) const;
};

ComponentMap component_label(const RegionSpec& spec, std::span<const double> center, double radius,
                             double h);

// Component of a region point x. When x's cell center lies outside the region,
// the nearest neighbouring labeled cell joined to x by a segment inside the
// region decides. -1 if x is outside the region or the map.
std::int32_t component_at(const ComponentMap& map, const RegionSpec& spec, std::span<const double> x);

struct TwoSidedPoint {
  Point point;
  int count_outer = 0;  // components at r = lambda^depth
  int count_inner = 0;  // components at r = lambda^depth / 2
  std::int32_t upper = -1;
  std::int32_t lower = -1;
  bool nested = false;
  bool verified = false;
  bool leftmost = false;
};

struct TwoSidedSample {
  int depth = 0;
  std::vector<TwoSidedPoint> points;
  int failures = 0;
};

// All depth-d corners of C x {0}, optionally with flood-fill witnesses at
// h = lambda^depth / cells_per_radius.
TwoSidedSample two_sided_sample(const RegionSpec& spec, int depth, bool verify = true,
                                double cells_per_radius = 64.0);

bool omega2_membership(std::span<const double> x, int depth);

}  // namespace slitlab
