#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slitlab/fields.hpp"
#include "slitlab/regions.hpp"
#include "slitlab/whitney.hpp"

namespace slitlab {

// psi_i tabulated on a lattice window, stored sparsely per cell. The raw bump
// is a tensor cubic ramp of width l/16 around Q_i, so phi_i = 1 on Q_i and
// phi_i = 0 off the open cube (9/8) Q_i.
struct PartitionOfUnity {
  GridGeometry grid;
  std::vector<std::int32_t> home;      // resolved cube containing the cell center, -1 if uncovered
  std::vector<std::size_t> offsets;    // CSR row starts, size() + 1 entries
  std::vector<std::int32_t> cube_ids;  // ascending within a row
  std::vector<double> weights;         // psi_i on covered cells, raw phi_i elsewhere

  bool covered(std::size_t cell) const { return home[cell] >= 0; }
  double psi(std::size_t cell, std::int32_t id) const;
  std::size_t covered_count() const;
};

// Raw bump of one cube at x.
double whitney_bump(const DyadicCube& q, std::span<const double> x);

PartitionOfUnity partition_of_unity(const WhitneyDecomposition& w, double h,
                                    const std::optional<Box>& window = std::nullopt);

// max over lattice cells of |grad psi_i| l(Q_i), exact bump derivatives, per generation of Q_i.
std::vector<double> scaled_gradient_by_gen(const PartitionOfUnity& pu, const WhitneyDecomposition& w);

// Mean of u over lattice cells with centers in `box` that belong to `restrict`
// and are masked in u (cells outside u's window count with value 0).
double cube_average(const GridField& u, const Box& box, const RegionSpec& restrict);

// Mean of u over Q0. Only cells of u's window can be nonzero; the cell count is exact.
double q0_average(const GridField& u, const CantorSpec& cantor);

struct ExtensionResult {
  GridField eu;                         // on the partition window
  std::vector<double> averages;         // a_i per W cube id (NaN for frontier)
  std::vector<std::uint8_t> resolved;   // covered cells of int N
  std::vector<std::uint8_t> v_weight;   // cells receiving weight from a V cube
  std::int64_t uncovered_cells = 0;     // N cells outside every resolved cube, set to 0
  double excluded_volume = 0.0;
};

class ExtensionOperator {
 public:
  ExtensionOperator(const CantorSpec& cantor, int n, int max_gen, double h,
                    const std::optional<Box>& window = std::nullopt);

  // Eu = u on Omega, sum a_i psi_i on covered N cells, 0 on the rest of N.
  ExtensionResult apply(const GridField& u) const;

  const RegionSpec& omega() const { return omega_; }
  const RegionSpec& nset() const { return nset_; }
  const WhitneyDecomposition& interior() const { return w_; }
  const WhitneyDecomposition& exterior() const { return wt_; }
  const ReflectMap& reflect() const { return r_; }
  const PartitionOfUnity& partition() const { return pu_; }
  double h() const { return h_; }

 private:
  CantorSpec cantor_;
  int n_;
  double h_;
  RegionSpec omega_, nset_, dset_;
  WhitneyDecomposition w_, wt_;
  ReflectMap r_;
  PartitionOfUnity pu_;
};

// u(x) = max(0, min(1, 3 - |x - x0| / r)) on the component of Omega cap B(x0, 3r)
// picked by `side` (+1 above x0, -1 below), 0 elsewhere.
struct JumpFunction {
  RegionSpec region;
  Point x0;
  double r = 0.0;
  int side = 1;
  ComponentMap map;
  std::int32_t label = -1;

  bool in_component(std::span<const double> x) const;
  double operator()(std::span<const double> x) const;
  // Closed-form ceiling 3^n vol(B1) r^(n-p) of its energy.
  double energy_bound(double p) const;
};

JumpFunction jump_test_function(const RegionSpec& region, Point x0, double r, int side, double h_map = 0.0);

struct RatioResult {
  double ratio = 0.0;
  double numerator = 0.0;    // ||grad Eu||_p over covered N cells
  double denominator = 0.0;  // ||grad u||_p over Omega
  double excluded_volume = 0.0;
};

RatioResult ratio_p(const ExtensionOperator& E, const GridField& u, double p);

// ratio_p of the jump function at the two-sided point (1 - lambda^depth, 0, ..., 0),
// upper side, radius r, with max_gen = log2(1/h) - 3.
RatioResult jump_ratio(const CantorSpec& cantor, int n, double p, double h, int depth = 3, double r = 0.25);

// Average of |Eu(x) - u(pi(x))| over covered cells of the finest resolved layer,
// pi the nearest point of dN (n = 2), skipping |x_2| < min_abs_y and cells fed by V.
struct TraceMismatch {
  double mean = 0.0;
  std::int64_t cells = 0;
};

TraceMismatch trace_mismatch(const ExtensionOperator& E, const ExtensionResult& res, const ScalarFunction& u,
                             double min_abs_y);

struct NormFactor {
  double value = 0.0;
  bool diverges = false;
};

// 1 / (1 - 2^((-n + p + dim)/p)); diverges once dim >= n - p.
NormFactor norm_factor(double lambda, int n, double p);
// (p - 1)/p^2 (n - p - dim)
double exponent_r(double dim, int n, double p);
// (1 - 2^(-r p/(p - 1)))^(1 - p)
double d_factor(double r, double p);
// n - p - C / (x^n log x)
double upper_curve(double x, int n, double p, double c);
// n - p - C / (x^(2p - p^2/n) log x), defined for n - 1 < p < n
std::optional<double> improved_upper(double x, int n, double p, double c);

struct BoundRow {
  double lambda = 0.0;
  double dim = 0.0;
  NormFactor factor;
  std::optional<double> empirical_ratio;
  double c_eff = 0.0;
  double upper_curve = 0.0;
  std::optional<double> improved;
};

std::vector<BoundRow> bound_report(int n, double p, const std::vector<double>& lambdas, double c,
                                   const std::vector<std::optional<double>>& ratios = {});

}  // namespace slitlab
