#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slitlab/cantor.hpp"
#include "slitlab/fields.hpp"
#include "slitlab/regions.hpp"

namespace slitlab {

struct SeparatedNet {
  std::vector<Point> points;
  double radius = 0.0;
  double candidate_spacing = 0.0;
  bool certified = true;  // false when candidates are coarser than radius / 2
  std::string warning;
};

// Greedy net over candidates in the given order: a candidate is kept iff it is
// at distance >= r from every kept point.
SeparatedNet separated_net(const std::vector<Point>& candidates, double r, double candidate_spacing);

// Candidates for C_lambda x {0} in R^n: depth-m construction corners with
// lambda^m < r / 4, lexicographic. Depth used is written to *depth.
std::vector<Point> slit_candidates(const CantorSpec& spec, int n, double r, int* depth = nullptr);

SeparatedNet slit_net(const CantorSpec& spec, int n, double r);

// Probes random points of C_lambda x {0} and counts those farther than r from the net.
std::int64_t maximality_misses(const SeparatedNet& net, const CantorSpec& spec, int n, int probes,
                               std::uint64_t seed);

enum class Separation { Lambda, TwoLambda };

struct NetLevel {
  int i = 0;
  double ball_radius = 0.0;  // lambda^i
  SeparatedNet net;
};

// Nets of C_lambda x {0} at levels i = 0..levels, separation lambda^i or 2 lambda^i.
struct NetHierarchy {
  CantorSpec cantor;
  int n = 2;
  double base = 0.25;
  Separation separation = Separation::Lambda;
  std::vector<NetLevel> levels;

  int top() const { return static_cast<int>(levels.size()) - 1; }
};

NetHierarchy build_hierarchy(const CantorSpec& spec, int n, int levels, Separation sep = Separation::Lambda);

// Number of level-(i + j) balls B(x_l, lambda^(i+j)) meeting B(x_k^i, lambda^i).
std::int64_t net_count(const NetHierarchy& h, int i, int k, int j);

struct CertificateRow {
  int i = 0;
  int k = 0;
  int j = 0;
  std::int64_t count = 0;
  double threshold = 0.0;  // lambda^(-j s)
};

struct DimensionEstimate {
  double s = 0.0;
  bool certified = false;
  int truncation = 0;  // deepest level used
  std::vector<CertificateRow> certificate;
};

// Smallest s on the grid (step, 2 step, ..., n) such that every (i, k) with a
// finer level has some j >= 1 with N_j^{i,k} < lambda^(-j s).
DimensionEstimate dim_upper_estimate(const NetHierarchy& h, double step = 0.01);

// F_i: union of the balls of all levels finer than i.
BoxUnion removed_set(const NetHierarchy& h, int i);

struct DensityRadius {
  double r = 0.0;
  bool found = false;
  std::string note;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double c = 0.0;           // m(Omega' cap B(x, r)) / r^n
  double half_width = 0.0;  // 95% normal interval on c
};

struct DensityResult {
  int side = 1;
  std::uint64_t seed = 0;
  double c_fit = 0.0;
  double half_width = 0.0;
  std::vector<DensityRadius> per_radius;
};

// Monte Carlo estimate of m(Omega' cap B(x, r)) for the component Omega' of
// region cap B(x, r) on the given side of x. Samples are drawn in fixed
// blocks with per-block seeds, so the result does not depend on the worker count.
DensityResult measure_density_check(const RegionSpec& region, const Point& x, const std::vector<double>& radii,
                                    std::int64_t samples, std::uint64_t seed, int side = 1);

}  // namespace slitlab
