#include "slitlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "slitlab/parallel.hpp"

namespace slitlab {

SmallPoint DyadicCube::center() const {
  SmallPoint c(n);
  for (int i = 0; i < n; ++i) c[i] = std::ldexp(static_cast<double>(idx[i]) + 0.5, -gen);
  return c;
}

Box DyadicCube::box() const {
  Box b;
  for (int i = 0; i < n; ++i) {
    b.lo.push_back(lo(i));
    b.hi.push_back(hi(i));
  }
  return b;
}

DyadicCube DyadicCube::child(unsigned mask) const {
  DyadicCube c = *this;
  c.gen = gen + 1;
  for (int i = 0; i < n; ++i) c.idx[i] = 2 * idx[i] + ((mask >> i) & 1u);
  return c;
}

bool DyadicCube::projection_within(const DyadicCube& other) const {
  if (other.gen > gen) return false;
  for (int i = 0; i < n - 1; ++i)
    if (ancestor_index(i, other.gen) != other.idx[i]) return false;
  return true;
}

std::vector<DyadicCube> root_cubes(const Box& window) {
  const int n = window.dim();
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < n; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(window.lo[i]));
    hi[i] = std::max(lo[i] + 1, static_cast<std::int64_t>(std::ceil(window.hi[i])));
  }
  std::vector<DyadicCube> out;
  DyadicCube c;
  c.n = n;
  c.idx = lo;
  for (;;) {
    out.push_back(c);
    int axis = n - 1;
    while (axis >= 0 && ++c.idx[axis] == hi[axis]) {
      c.idx[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

bool cubes_touch(const DyadicCube& a, const DyadicCube& b) {
  for (int i = 0; i < a.n; ++i)
    if (a.hi(i) < b.lo(i) || b.hi(i) < a.lo(i)) return false;
  return true;
}

std::size_t WhitneyDecomposition::resolved_count() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), CubeStatus::Resolved));
}

WhitneyDecomposition WhitneyDecomposition::from_cubes(const RegionSpec& region, int max_gen,
                                                      std::vector<DyadicCube> cubes,
                                                      std::vector<CubeStatus> status) {
  require(cubes.size() == status.size(), "whitney: cube and status lists differ in length");
  std::vector<std::size_t> order(cubes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cubes[a] < cubes[b]; });
  WhitneyDecomposition w;
  w.region = region;
  w.max_gen = max_gen;
  for (std::size_t i : order) {
    w.cubes.push_back(cubes[i]);
    w.status.push_back(status[i]);
  }
  const std::size_t count = w.cubes.size();
  w.index.reserve(count * 2);
  for (std::size_t i = 0; i < count; ++i) w.index.emplace(w.cubes[i], static_cast<std::int32_t>(i));

  w.adjacency.assign(count, {});
  for (std::size_t i = 0; i < count; ++i) {
    if (!w.resolved(static_cast<std::int32_t>(i))) continue;
    const DyadicCube& q = w.cubes[i];
    const int n = q.n;
    for (int g = 0; g <= q.gen; ++g) {
      const int d = q.gen - g;
      std::array<std::int64_t, kMaxDim> lo{}, hi{};
      for (int a = 0; a < n; ++a) {
        lo[a] = -((-q.idx[a]) >> d) - 1;
        hi[a] = (q.idx[a] + 1) >> d;
      }
      DyadicCube probe;
      probe.n = n;
      probe.gen = g;
      probe.idx = lo;
      for (;;) {
        const std::int32_t id = w.find(probe);
        if (id >= 0 && id != static_cast<std::int32_t>(i) && w.resolved(id)) {
          w.adjacency[i].push_back(id);
          w.adjacency[static_cast<std::size_t>(id)].push_back(static_cast<std::int32_t>(i));
        }
        int axis = n - 1;
        while (axis >= 0 && ++probe.idx[axis] > hi[axis]) {
          probe.idx[axis] = lo[axis];
          --axis;
        }
        if (axis < 0) break;
      }
    }
  }
  for (auto& adj : w.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return w;
}

DistanceBracket cube_distance(const RegionSpec& region, const DyadicCube& q) {
  const SmallPoint c = q.center();
  DistanceBracket b = refined_boundary_distance(region, c.span());
  b.lo = std::max(0.0, b.lo - q.diameter() / 2.0);
  return b;
}

namespace {

// The open cube meets D (prefix (0,1), planar frame minus the closed hole).
bool interior_meets_d(const DyadicCube& q) {
  const int n = q.n;
  for (int i = 0; i < n - 2; ++i)
    if (!(q.lo(i) < 1.0 && q.hi(i) > 0.0)) return false;
  const double alo = std::max(q.lo(n - 2), -2.0), ahi = std::min(q.hi(n - 2), 1.0);
  const double blo = std::max(q.lo(n - 1), -1.5), bhi = std::min(q.hi(n - 1), 1.5);
  if (!(alo < ahi && blo < bhi)) return false;
  const bool inside_hole = alo >= -1.0 && ahi <= 0.0 && blo >= -1.0 && bhi <= 1.0;
  return !inside_hole;
}

enum Decision : std::uint8_t { kDiscard, kAccept, kSplit };

Decision decide(const RegionSpec& region, const DyadicCube& q) {
  if (region.kind == RegionSpec::Kind::NLambdaComplement && !interior_meets_d(q)) return kDiscard;
  const SmallPoint c = q.center();
  const DistanceBracket b = refined_boundary_distance(region, c.span());
  if (b.lo > b.hi + 1e-12) {
    std::ostringstream os;
    os << "whitney: inconsistent distance bracket [" << b.lo << ", " << b.hi << "] at cube gen " << q.gen
       << " idx (";
    for (int i = 0; i < q.n; ++i) os << (i ? "," : "") << q.idx[i];
    os << ")";
    throw Error(os.str());
  }
  const double diam = q.diameter();
  const bool inside = region_membership(region, c.span());
  if (!inside && b.lo > diam / 2.0) return kDiscard;
  const double lo = b.lo - diam / 2.0;
  if (inside && lo >= diam && b.hi <= 4.0 * diam) return kAccept;
  return kSplit;
}

}  // namespace

WhitneyDecomposition whitney_decompose(const RegionSpec& region, int max_gen) {
  require(has_distance_oracle(region), "whitney: region '" + region.name() + "' has no distance oracle");
  require(max_gen >= 0 && max_gen <= 40, "whitney: max_gen must be in [0, 40]");
  std::vector<DyadicCube> cubes;
  std::vector<CubeStatus> status;
  if (region.kind == RegionSpec::Kind::Box && region.box.volume() <= 0.0)
    return WhitneyDecomposition::from_cubes(region, max_gen, {}, {});

  std::vector<DyadicCube> current = root_cubes(region.bbox);
  for (int gen = 0; gen <= max_gen && !current.empty(); ++gen) {
    std::vector<std::uint8_t> decision(current.size());
    parallel_for(current.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) decision[i] = decide(region, current[i]);
    }, 256);
    std::vector<DyadicCube> next;
    const unsigned children = 1u << region.n;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (decision[i] == kAccept) {
        cubes.push_back(current[i]);
        status.push_back(CubeStatus::Resolved);
      } else if (decision[i] == kSplit) {
        if (gen == max_gen) {
          cubes.push_back(current[i]);
          status.push_back(CubeStatus::Frontier);
        } else {
          for (unsigned m = 0; m < children; ++m) next.push_back(current[i].child(m));
        }
      }
    }
    current = std::move(next);
  }
  return WhitneyDecomposition::from_cubes(region, max_gen, std::move(cubes), std::move(status));
}

namespace {

// Does the open cube meet the closed face {x_axis = c} of [0,1]^{n-1} x [-1,1]?
bool interior_meets_face(const DyadicCube& q, int axis, double c) {
  const int n = q.n;
  if (!(q.lo(axis) < c && c < q.hi(axis))) return false;
  for (int b = 0; b < n; ++b) {
    if (b == axis) continue;
    const double lo = b == n - 1 ? -1.0 : 0.0;
    const double hi = 1.0;
    if (!(q.lo(b) < hi && q.hi(b) > lo)) return false;
  }
  return true;
}

}  // namespace

WhitneyReport verify_whitney(const WhitneyDecomposition& dec) {
  WhitneyReport r;
  const RegionSpec& region = dec.region;
  const std::size_t count = dec.cubes.size();
  for (std::size_t i = 0; i < count; ++i) {
    const DyadicCube& q = dec.cubes[i];
    const double vol = std::pow(q.side(), q.n);
    const bool res = dec.resolved(static_cast<std::int32_t>(i));
    if (res) {
      ++r.resolved;
      r.resolved_volume += vol;
    } else {
      ++r.frontier;
      r.frontier_volume += vol;
    }
    for (int g = 0; g < q.gen; ++g) {
      DyadicCube a = q;
      a.gen = g;
      for (int ax = 0; ax < q.n; ++ax) a.idx[ax] = q.ancestor_index(ax, g);
      if (dec.find(a) >= 0) ++r.w2;
    }
    for (int ax = 0; ax < q.n; ++ax) {
      const double c0 = ax == q.n - 1 ? -1.0 : 0.0;
      if (interior_meets_face(q, ax, c0) || interior_meets_face(q, ax, 1.0)) {
        ++r.face_crossings;
        break;
      }
    }
    if (!res) continue;

    const DistanceBracket b = cube_distance(region, q);
    const double diam = q.diameter();
    bool inside = b.lo > 0.0 && region_membership(region, q.center().span());
    for (unsigned m = 0; inside && m < (1u << q.n); ++m) {
      SmallPoint corner(q.n);
      for (int ax = 0; ax < q.n; ++ax) corner[ax] = ((m >> ax) & 1u) ? q.hi(ax) : q.lo(ax);
      inside = region_membership(region, corner.span());
    }
    if (!inside) ++r.w1;
    if (!(b.lo <= 4.0 * diam * (1.0 + 1e-12) && b.hi >= diam * (1.0 - 1e-12))) ++r.w3;
    for (std::int32_t j : dec.adjacency[i]) {
      if (j <= static_cast<std::int32_t>(i)) continue;
      const int dg = std::abs(dec.cubes[static_cast<std::size_t>(j)].gen - q.gen);
      if (dg > 2) ++r.w4;
    }
  }
  const auto total = r.resolved + r.frontier;
  r.frontier_fraction = total == 0 ? 0.0 : static_cast<double>(r.frontier) / static_cast<double>(total);
  return r;
}

std::vector<std::int32_t> central_family(const WhitneyDecomposition& w) {
  require(w.region.kind == RegionSpec::Kind::NLambda, "central_family: decomposition must be of int N");
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    if (!w.resolved(static_cast<std::int32_t>(i))) continue;
    const DyadicCube& q = w.cubes[i];
    const int n = q.n;
    if (q.idx[n - 1] != 0 && q.idx[n - 1] != -1) continue;
    bool meets = true;
    for (int a = 0; a < n - 1; ++a) meets = meets && q.lo(a) <= 1.0 && q.hi(a) >= 0.0;
    if (meets) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

namespace {

DyadicCube column_key(const DyadicCube& q, int g) {
  DyadicCube k;
  k.n = q.n;
  k.gen = g;
  for (int a = 0; a < q.n - 1; ++a) k.idx[a] = q.ancestor_index(a, g);
  k.idx[q.n - 1] = 0;
  return k;
}

bool upper_half(const DyadicCube& q) { return q.idx[q.n - 1] >= 0; }

}  // namespace

ReflectMap reflect_assign(const WhitneyDecomposition& w, const WhitneyDecomposition& wt) {
  require(w.region.kind == RegionSpec::Kind::NLambda, "reflect_assign: first decomposition must be of int N");
  require(wt.region.kind == RegionSpec::Kind::NLambdaComplement,
          "reflect_assign: second decomposition must be of the complement of N");
  std::unordered_map<DyadicCube, std::vector<std::int32_t>, CubeHash> columns;
  for (std::size_t i = 0; i < wt.cubes.size(); ++i) {
    if (!wt.resolved(static_cast<std::int32_t>(i))) continue;
    columns[column_key(wt.cubes[i], wt.cubes[i].gen)].push_back(static_cast<std::int32_t>(i));
  }
  ReflectMap r;
  r.target.assign(w.cubes.size(), kUnassigned);
  r.in_v.assign(w.cubes.size(), 0);
  for (std::int32_t id : central_family(w)) r.in_v[static_cast<std::size_t>(id)] = 1;

  parallel_for(w.cubes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (!w.resolved(static_cast<std::int32_t>(i))) continue;
      if (r.in_v[i]) {
        r.target[i] = kQ0;
        continue;
      }
      const DyadicCube& q = w.cubes[i];
      const SmallPoint qc = q.center();
      const bool up = upper_half(q);
      double best = std::numeric_limits<double>::infinity();
      std::int32_t best_id = kUnassigned;
      for (int g = q.gen; g >= std::max(0, q.gen - 1); --g) {
        auto it = columns.find(column_key(q, g));
        if (it == columns.end()) continue;
        for (std::int32_t id : it->second) {
          const DyadicCube& c = wt.cubes[static_cast<std::size_t>(id)];
          if (upper_half(c) != up) continue;
          const double d = distance(qc.span(), c.center().span());
          if (d < best || (d == best && c < wt.cubes[static_cast<std::size_t>(best_id)])) {
            best = d;
            best_id = id;
          }
        }
      }
      r.target[i] = best_id;
    }
  }, 512);
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    if (!w.resolved(static_cast<std::int32_t>(i)) || r.in_v[i]) continue;
    if (r.target[i] >= 0) ++r.assigned;
    else ++r.unassigned;
  }
  return r;
}

ReflectAudit audit_reflect(const WhitneyDecomposition& w, const WhitneyDecomposition& wt, const ReflectMap& r) {
  ReflectAudit a;
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    const std::int32_t t = r.target[i];
    if (t < 0) continue;
    ++a.checked;
    const DyadicCube& q = w.cubes[i];
    const DyadicCube& c = wt.cubes[static_cast<std::size_t>(t)];
    const int n = q.n;
    // Closed half-spaces: the cube lies in {x_n >= 0} or {x_n <= 0}; both must agree.
    const bool q_up = q.lo(n - 1) >= 0.0, q_down = q.hi(n - 1) <= 0.0;
    const bool c_up = c.lo(n - 1) >= 0.0, c_down = c.hi(n - 1) <= 0.0;
    if (!((q_up && c_up) || (q_down && c_down))) ++a.half_space;
    else if ((q.center()[n - 1] > 0) != (c.center()[n - 1] > 0)) ++a.half_space;
    if (!q.projection_within(c)) ++a.projection;
    if (c.side() > 2.0 * q.side()) ++a.size;
  }
  return a;
}

ChainGraph::ChainGraph(const WhitneyDecomposition& wt) : wt_(wt) {
  const std::size_t count = wt.cubes.size();
  q0_adjacent_.assign(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    if (!wt.resolved(static_cast<std::int32_t>(i))) continue;
    const DyadicCube& q = wt.cubes[i];
    const int n = q.n;
    bool leaves = false;
    for (int a = n - 2; a < n; ++a) leaves = leaves || q.lo(a) <= -1.0 || q.hi(a) >= 1.0;
    if (leaves) {
      q0_adjacent_[i] = 1;
      q0_neighbors_.push_back(static_cast<std::int32_t>(i));
    }
  }
  stamp_.assign(count + 1, 0);
  parent_.assign(count + 1, -1);
}

Chain ChainGraph::chain(std::int32_t a, std::int32_t b, ChainConstraint constraint, bool reverse) const {
  const auto count = static_cast<std::int32_t>(wt_.cubes.size());
  auto node = [&](std::int32_t id) { return id == kQ0 ? count : id; };
  auto id_of = [&](std::int32_t nd) { return nd == count ? kQ0 : nd; };
  auto valid = [&](std::int32_t id) { return id == kQ0 || (id >= 0 && id < count && wt_.resolved(id)); };
  require(valid(a) && valid(b), "chain: endpoints must be resolved cubes or Q0");
  Chain out;
  out.constraint = constraint;
  if (constraint == ChainConstraint::ProjectionMonotone)
    require(a != kQ0 && b == kQ0, "chain: projection-monotone chains run from a cube to Q0");
  if (a == b) {
    out.nodes = {a};
    return out;
  }
  const DyadicCube* source = a == kQ0 ? nullptr : &wt_.cubes[static_cast<std::size_t>(a)];
  auto admissible = [&](std::int32_t nd) {
    if (constraint == ChainConstraint::None || nd == count) return true;
    return source->projection_within(wt_.cubes[static_cast<std::size_t>(nd)]);
  };

  if (++epoch_ == std::numeric_limits<std::int32_t>::max()) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  std::deque<std::int32_t> queue;
  const std::int32_t start = node(a), goal = node(b);
  stamp_[static_cast<std::size_t>(start)] = epoch_;
  parent_[static_cast<std::size_t>(start)] = -1;
  queue.push_back(start);
  bool found = false;
  auto visit = [&](std::int32_t from, std::int32_t nd) {
    if (stamp_[static_cast<std::size_t>(nd)] == epoch_ || !admissible(nd)) return false;
    stamp_[static_cast<std::size_t>(nd)] = epoch_;
    parent_[static_cast<std::size_t>(nd)] = from;
    if (nd == goal) return true;
    queue.push_back(nd);
    return false;
  };
  while (!queue.empty() && !found) {
    const std::int32_t cur = queue.front();
    queue.pop_front();
    if (cur == count) {
      if (!reverse) {
        for (std::int32_t nb : q0_neighbors_)
          if ((found = visit(cur, nb))) break;
      } else {
        for (auto it = q0_neighbors_.rbegin(); it != q0_neighbors_.rend(); ++it)
          if ((found = visit(cur, *it))) break;
      }
      continue;
    }
    const auto& adj = wt_.adjacency[static_cast<std::size_t>(cur)];
    const bool q0 = q0_adjacent_[static_cast<std::size_t>(cur)] != 0;
    // Q0 sorts before every cube.
    if (!reverse) {
      if (q0 && (found = visit(cur, count))) break;
      for (std::int32_t nb : adj)
        if ((found = visit(cur, nb))) break;
    } else {
      for (auto it = adj.rbegin(); it != adj.rend(); ++it)
        if ((found = visit(cur, *it))) break;
      if (!found && q0) found = visit(cur, count);
    }
  }
  if (!found) {
    std::ostringstream os;
    os << "chain: no path from " << (a == kQ0 ? std::string("Q0") : std::to_string(a)) << " to "
       << (b == kQ0 ? std::string("Q0") : std::to_string(b))
       << (constraint == ChainConstraint::ProjectionMonotone ? " under the projection constraint" : "");
    throw Error(os.str());
  }
  for (std::int32_t nd = goal; nd != -1; nd = parent_[static_cast<std::size_t>(nd)]) out.nodes.push_back(id_of(nd));
  std::reverse(out.nodes.begin(), out.nodes.end());
  return out;
}

double fit_log2_slope(const std::vector<std::int64_t>& values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= 0) continue;
    const double x = static_cast<double>(k), y = std::log2(static_cast<double>(values[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ClaimCount claim_count(const WhitneyDecomposition& w, const WhitneyDecomposition& wt, const ReflectMap& r,
                       int k_max) {
  require(k_max >= 0, "claim_count: k_max must be >= 0");
  ClaimCount out;
  out.k_max = k_max;
  const ChainGraph graph(wt);
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(k_max + 1),
                                                std::vector<std::int64_t>(wt.cubes.size(), 0));
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    if (!w.resolved(static_cast<std::int32_t>(i)) || r.in_v[i]) continue;
    bool near_v = false;
    for (std::int32_t j : w.adjacency[i]) near_v = near_v || r.in_v[static_cast<std::size_t>(j)];
    if (!near_v || r.target[i] < 0) continue;
    ++out.sources;
    Chain c;
    try {
      c = graph.chain(r.target[i], kQ0, ChainConstraint::ProjectionMonotone);
    } catch (const Error&) {
      ++out.unreachable;
      continue;
    }
    for (std::int32_t id : c.nodes) {
      if (id < 0) continue;
      const int k = w.cubes[i].gen - wt.cubes[static_cast<std::size_t>(id)].gen;
      if (k >= 0 && k <= k_max) ++counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(id)];
    }
  }
  for (const auto& row : counts) out.max_count.push_back(row.empty() ? 0 : *std::max_element(row.begin(), row.end()));
  out.fitted_exponent = fit_log2_slope(out.max_count);
  out.fitted_constant = out.max_count.empty() ? 0.0 : static_cast<double>(out.max_count[0]);
  return out;
}

ChainBound chain_length_bound(const WhitneyDecomposition& w, const WhitneyDecomposition& wt,
                              const ReflectMap& r) {
  ChainBound out;
  out.max_length_by_gen.assign(static_cast<std::size_t>(w.max_gen + 1), 0);
  const ChainGraph graph(wt);
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    for (std::int32_t j : w.adjacency[i]) {
      if (j <= static_cast<std::int32_t>(i)) continue;
      if (r.in_v[i] || r.in_v[static_cast<std::size_t>(j)]) continue;
      const std::int32_t a = r.target[i], b = r.target[static_cast<std::size_t>(j)];
      if (a == kUnassigned || b == kUnassigned) continue;
      ++out.pairs;
      try {
        const std::size_t len = graph.chain(a, b).length();
        out.max_length = std::max(out.max_length, len);
        const int g = std::max(w.cubes[i].gen, w.cubes[static_cast<std::size_t>(j)].gen);
        auto& slot = out.max_length_by_gen[static_cast<std::size_t>(g)];
        slot = std::max(slot, len);
      } catch (const Error&) {
        ++out.unreachable;
      }
    }
  }
  return out;
}

}  // namespace slitlab
