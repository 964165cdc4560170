#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slitlab/common.hpp"
#include "slitlab/regions.hpp"

namespace slitlab {

// Pi_i [idx_i 2^-gen, (idx_i + 1) 2^-gen]; corners are exact in binary floating point.
struct DyadicCube {
  int gen = 0;
  int n = 0;
  std::array<std::int64_t, kMaxDim> idx{};

  double side() const { return std::ldexp(1.0, -gen); }
  double lo(int axis) const { return std::ldexp(static_cast<double>(idx[axis]), -gen); }
  double hi(int axis) const { return std::ldexp(static_cast<double>(idx[axis] + 1), -gen); }
  SmallPoint center() const;
  Box box() const;
  double diameter() const { return std::sqrt(static_cast<double>(n)) * side(); }
  DyadicCube child(unsigned mask) const;
  // Index of the generation-g ancestor (g <= gen) along one axis.
  std::int64_t ancestor_index(int axis, int g) const { return idx[axis] >> (gen - g); }
  // P_n(this) is contained in P_n(other): projections drop the last axis.
  bool projection_within(const DyadicCube& other) const;

  friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
    return a.gen == b.gen && a.n == b.n && a.idx == b.idx;
  }
  friend bool operator<(const DyadicCube& a, const DyadicCube& b) {
    if (a.gen != b.gen) return a.gen < b.gen;
    for (int i = 0; i < a.n; ++i)
      if (a.idx[i] != b.idx[i]) return a.idx[i] < b.idx[i];
    return false;
  }
};

struct CubeHash {
  std::size_t operator()(const DyadicCube& c) const {
    std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(c.gen);
    for (int i = 0; i < c.n; ++i) {
      h ^= static_cast<std::uint64_t>(c.idx[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

// Cubes of generation 0 whose closure meets the box.
std::vector<DyadicCube> root_cubes(const Box& window);

// Closed cubes intersect.
bool cubes_touch(const DyadicCube& a, const DyadicCube& b);

enum class CubeStatus { Resolved, Frontier };

struct WhitneyDecomposition {
  RegionSpec region;
  int max_gen = 0;
  std::vector<DyadicCube> cubes;  // sorted by (gen, idx)
  std::vector<CubeStatus> status;
  std::vector<std::vector<std::int32_t>> adjacency;  // resolved cubes only, ascending ids
  std::unordered_map<DyadicCube, std::int32_t, CubeHash> index;

  // Builds the index and the adjacency graph from a hand-made cube list.
  static WhitneyDecomposition from_cubes(const RegionSpec& region, int max_gen, std::vector<DyadicCube> cubes,
                                         std::vector<CubeStatus> status);

  std::int32_t find(const DyadicCube& c) const {
    auto it = index.find(c);
    return it == index.end() ? -1 : it->second;
  }
  bool resolved(std::int32_t id) const { return status[static_cast<std::size_t>(id)] == CubeStatus::Resolved; }
  std::size_t resolved_count() const;
  std::size_t frontier_count() const { return cubes.size() - resolved_count(); }
};

// Certified bracket for dist(Q, boundary) from the bracket at the center.
DistanceBracket cube_distance(const RegionSpec& region, const DyadicCube& q);

// Top-down dyadic subdivision from generation 0 over the region's bounding box.
// A cube is resolved when its bracket certifies sqrt(n) l <= dist(Q, dR) <= 4 sqrt(n) l,
// discarded when certified outside, and frontier when still undecided at max_gen.
// For the complement of N only cubes whose interior meets D are kept.
WhitneyDecomposition whitney_decompose(const RegionSpec& region, int max_gen);

struct WhitneyReport {
  std::int64_t resolved = 0;
  std::int64_t frontier = 0;
  std::int64_t w1 = 0;
  std::int64_t w2 = 0;
  std::int64_t w3 = 0;
  std::int64_t w4 = 0;
  std::int64_t face_crossings = 0;  // interiors meeting the boundary of (0,1)^{n-1} x (-1,1)
  double frontier_fraction = 0.0;
  double resolved_volume = 0.0;
  double frontier_volume = 0.0;
  std::int64_t violations() const { return w1 + w2 + w3 + w4; }
};

WhitneyReport verify_whitney(const WhitneyDecomposition& dec);

// Resolved cubes of a decomposition of int N whose closure meets [0,1]^{n-1} x {0}.
std::vector<std::int32_t> central_family(const WhitneyDecomposition& w);

inline constexpr std::int32_t kQ0 = -1;          // reflected cube is Q0
inline constexpr std::int32_t kUnassigned = -2;  // no admissible cube at this truncation

struct ReflectMap {
  std::vector<std::int32_t> target;  // per W cube id: W~ cube id, kQ0 or kUnassigned
  std::vector<char> in_v;            // per W cube id
  std::int64_t assigned = 0;
  std::int64_t unassigned = 0;  // resolved non-V cubes without a target
  double unassigned_fraction() const {
    const auto total = assigned + unassigned;
    return total == 0 ? 0.0 : static_cast<double>(unassigned) / static_cast<double>(total);
  }
};

// For Q_i in V: Q0. Otherwise the closest resolved W~ cube (center distance, then
// (gen, idx)) in the same closed half-space with P_n(Q_i) in P_n(Q~) and
// l(Q~) <= 2 l(Q_i).
ReflectMap reflect_assign(const WhitneyDecomposition& w, const WhitneyDecomposition& wt);

struct ReflectAudit {
  std::int64_t checked = 0;
  std::int64_t half_space = 0;
  std::int64_t projection = 0;
  std::int64_t size = 0;
  std::int64_t failures() const { return half_space + projection + size; }
};

ReflectAudit audit_reflect(const WhitneyDecomposition& w, const WhitneyDecomposition& wt, const ReflectMap& r);

// Chains live in the graph of resolved W~ cubes plus the pseudo-node Q0, which
// is adjacent to every cube whose closure leaves (-1,1)^2 in the last two axes.
enum class ChainConstraint { None, ProjectionMonotone };

struct Chain {
  std::vector<std::int32_t> nodes;  // W~ ids, kQ0 for the pseudo-node
  ChainConstraint constraint = ChainConstraint::None;
  std::size_t length() const { return nodes.size(); }
};

class ChainGraph {
 public:
  explicit ChainGraph(const WhitneyDecomposition& wt);

  // Breadth-first shortest path; neighbours are visited in ascending (gen, idx)
  // order, or descending when `reverse` is set. Throws Error when unreachable.
  Chain chain(std::int32_t a, std::int32_t b, ChainConstraint constraint = ChainConstraint::None,
              bool reverse = false) const;

  bool touches_q0(std::int32_t id) const { return q0_adjacent_[static_cast<std::size_t>(id)] != 0; }
  const WhitneyDecomposition& decomposition() const { return wt_; }

 private:
  const WhitneyDecomposition& wt_;
  std::vector<char> q0_adjacent_;
  std::vector<std::int32_t> q0_neighbors_;
  mutable std::vector<std::int32_t> stamp_;
  mutable std::vector<std::int32_t> parent_;
  mutable std::int32_t epoch_ = 0;
};

struct ClaimCount {
  int k_max = 0;
  std::vector<std::int64_t> max_count;  // c_k = max over Q~ of the count, k = 0..k_max
  std::int64_t sources = 0;             // non-V cubes with a V neighbour
  std::int64_t unreachable = 0;
  double fitted_exponent = 0.0;         // slope of log2 c_k against k over counts > 0
  double fitted_constant = 0.0;         // c_0
};

ClaimCount claim_count(const WhitneyDecomposition& w, const WhitneyDecomposition& wt, const ReflectMap& r,
                       int k_max);

// Least-squares slope of log2(values[k]) against k over entries > 0.
double fit_log2_slope(const std::vector<std::int64_t>& values);

// Longest chain between the reflected cubes of neighbouring W cubes outside V.
struct ChainBound {
  std::int64_t pairs = 0;
  std::int64_t unreachable = 0;
  std::size_t max_length = 0;
  std::vector<std::size_t> max_length_by_gen;  // indexed by the finer generation of the pair
};

ChainBound chain_length_bound(const WhitneyDecomposition& w, const WhitneyDecomposition& wt,
                              const ReflectMap& r);

}  // namespace slitlab
