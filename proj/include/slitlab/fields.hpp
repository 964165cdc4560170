#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slitlab/common.hpp"
#include "slitlab/grid_geometry.hpp"
#include "slitlab/regions.hpp"

namespace slitlab {

// Values at the cell centers of a lattice window. Cells outside the window
// read as zero (zero extension). `links` bit a says the cell couples to its
// +a neighbour; differences are never taken across a missing link, so the
// two sides of the slit stay independent.
struct GridField {
  GridGeometry grid;
  int components = 1;
  std::vector<double> values;  // cell-major, components contiguous
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> links;
  std::vector<std::uint8_t> flags;  // gradient output: bit a set where component a had no stencil

  std::size_t size() const { return grid.size(); }
  double value(std::size_t cell, int c = 0) const {
    return values[cell * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)];
  }
  double& value(std::size_t cell, int c = 0) {
    return values[cell * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)];
  }
  bool linked(std::size_t cell, int axis) const { return ((links[cell] >> axis) & 1u) != 0; }
  std::size_t masked_count() const;

  static GridField zeros(const GridGeometry& grid, int components = 1);
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Lattice window covering `window`; its corners must be multiples of h.
GridGeometry aligned_grid(const Box& window, double h);

// Membership at cell centers and the midpoint link rule.
void assign_region_mask(GridField& f, const RegionSpec& region);

// f at the masked cell centers of the window (default: the region's bounding box).
GridField grid_sample(const ScalarFunction& f, const RegionSpec& region, double h,
                      const std::optional<Box>& window = std::nullopt);

// Central differences across two links, one-sided across one, zero (and a flag) across none.
GridField gradient(const GridField& u);

// sum over masked (and submask) cells of |g|^p h^n, summed pairwise in cell order.
double energy_p(const GridField& g, double p, const std::vector<std::uint8_t>* submask = nullptr);
// energy_p^(1/p). An empty mask gives 0 and a warning on stderr.
double seminorm_p(const GridField& g, double p, const std::vector<std::uint8_t>* submask = nullptr);

// Finite union of closed boxes and closed balls in R^n.
struct Ball {
  Point center;
  double radius = 0.0;
};

struct BoxUnion {
  int n = 2;
  std::vector<Box> boxes;
  std::vector<Ball> balls;

  bool empty() const { return boxes.empty() && balls.empty(); }
  void add_box(Box b);
  void add_ball(Point c, double r);
  bool contains(std::span<const double> x) const;
  Box bounds() const;
};

struct ProjectionMeasure {
  double value = 0.0;
  double error_bound = 0.0;
  bool exact = false;
};

// (n-1)-volume of P_m(F), m in 1..n (the m-th coordinate is dropped). Exact
// interval union for n = 2; pixel counting with an error bound otherwise.
ProjectionMeasure projection_measure(const BoxUnion& F, int m, double pixel = 0.0);

// Pixel-count oracle on the lattice of spacing h in the projected coordinates.
double projection_measure_pixels(const BoxUnion& F, int m, double h);

// Raised when a hypothesis of the energy inequality fails; clause() names it.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string clause, const std::string& what) : Error(what), clause_(std::move(clause)) {}
  const std::string& clause() const { return clause_; }

 private:
  std::string clause_;
};

struct EnergyCheck {
  double lhs = 0.0;    // integral of |grad f|^p over Q \ F
  double scale = 0.0;  // delta^((n-p)/n) l(Q)^(n-p)
  double ratio = 0.0;
  double mass_zero = 0.0;  // measure of {f = 0} in Q/2
  double mass_one = 0.0;   // measure of {f = 1} in Q/2
  double mass_threshold = 0.0;
  std::vector<double> projection;  // m_{n-1}(P_i(F)) per axis
  double projection_budget = 0.0;
};

// Checks the hypotheses (exponent, delta, range, projection, level-set) of the
// punctured-cube Sobolev-Poincare bound, then evaluates both sides.
EnergyCheck poincare_energy_check(const Box& Q, const BoxUnion& F, const GridField& f, double delta, double p,
                                  double level_tol = 1e-12);

}  // namespace slitlab
