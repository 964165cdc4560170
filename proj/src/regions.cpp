#include "slitlab/regions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace slitlab {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSlack = 4.0 * kCantorTol;

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

// The planar part of D and Q0: (-2,1) x (-3/2,3/2) minus a closed rectangle.
bool planar_frame(double a, double b, double hole_hi) {
  if (!(a > -2.0 && a < 1.0 && b > -1.5 && b < 1.5)) return false;
  return !(a >= -1.0 && a <= hole_hi && b >= -1.0 && b <= 1.0);
}

bool in_d(std::span<const double> x, int n) {
  for (int i = 0; i < n - 2; ++i)
    if (!in_open_unit(x[i])) return false;
  return planar_frame(x[n - 2], x[n - 1], 0.0);
}

bool in_q0(std::span<const double> x, int n) {
  for (int i = 0; i < n - 2; ++i)
    if (!in_open_unit(x[i])) return false;
  return planar_frame(x[n - 2], x[n - 1], 1.0);
}

bool in_n(std::span<const double> x, int n, const CantorSpec& c) {
  for (int i = 0; i < n - 1; ++i)
    if (x[i] < 0.0 || x[i] > 1.0) return false;
  const double t = std::abs(x[n - 1]);
  if (t > 1.0) return false;
  return t <= c_distance(x.first(static_cast<std::size_t>(n - 1)), c);
}

bool in_omega2_planar(double x, double y, const CantorSpec& c) {
  if (!(x > -1.0 && x < 1.0 && y > -1.0 && y < 1.0)) return false;
  if (x >= 0.0 && x <= 1.0 && std::abs(y) <= k_distance(x, c)) return false;
  return true;
}

}  // namespace

Box d_bbox(int n) {
  Box b;
  for (int i = 0; i < n - 2; ++i) {
    b.lo.push_back(0.0);
    b.hi.push_back(1.0);
  }
  b.lo.push_back(-2.0);
  b.hi.push_back(1.0);
  b.lo.push_back(-1.5);
  b.hi.push_back(1.5);
  return b;
}

RegionSpec RegionSpec::make(Kind kind, int n, const CantorSpec& cantor) {
  require(n >= 2 && n <= kMaxDim, "region: n must be in [2, " + std::to_string(kMaxDim) + "]");
  RegionSpec s;
  s.kind = kind;
  s.n = n;
  s.cantor = cantor;
  switch (kind) {
    case Kind::D:
    case Kind::OmegaLambda:
    case Kind::Q0Tilde:
    case Kind::NLambdaComplement:
      require(cantor.codim == n - 1, "region: Cantor codim must equal n - 1");
      s.bbox = d_bbox(n);
      break;
    case Kind::NLambda: {
      require(cantor.codim == n - 1, "region: Cantor codim must equal n - 1");
      const double half = cantor.kind == CantorSpec::Kind::FixedRatio
                              ? std::min(1.0, std::sqrt(n - 1.0) * (0.5 - cantor.lambda))
                              : std::min(1.0, 0.5 * std::sqrt(n - 1.0));
      for (int i = 0; i < n - 1; ++i) {
        s.bbox.lo.push_back(0.0);
        s.bbox.hi.push_back(1.0);
      }
      s.bbox.lo.push_back(-half);
      s.bbox.hi.push_back(half);
      break;
    }
    case Kind::Omega2:
    case Kind::Omega2Product:
      require(cantor.codim == 1, "region: Omega2 uses a 1-D Cantor set");
      s.bbox.lo.assign(static_cast<std::size_t>(n), -1.0);
      s.bbox.hi.assign(static_cast<std::size_t>(n), 1.0);
      break;
    case Kind::Box:
      throw Error("region: use RegionSpec::open_box for boxes");
  }
  return s;
}

RegionSpec RegionSpec::omega2(int depth, int n) {
  return make(n == 2 ? Kind::Omega2 : Kind::Omega2Product, n, fat_thin_cantor(depth));
}

RegionSpec RegionSpec::open_box(const Box& b) {
  RegionSpec s;
  s.kind = Kind::Box;
  s.n = b.dim();
  require(s.n >= 1 && s.n <= kMaxDim, "region: unsupported box dimension");
  s.box = b;
  s.bbox = b;
  return s;
}

std::string kind_name(RegionSpec::Kind kind) {
  switch (kind) {
    case RegionSpec::Kind::D: return "D";
    case RegionSpec::Kind::NLambda: return "N_lambda";
    case RegionSpec::Kind::NLambdaComplement: return "N_lambda_complement";
    case RegionSpec::Kind::OmegaLambda: return "Omega_lambda";
    case RegionSpec::Kind::Q0Tilde: return "Q0_tilde";
    case RegionSpec::Kind::Omega2: return "Omega2";
    case RegionSpec::Kind::Omega2Product: return "Omega2_product";
    case RegionSpec::Kind::Box: return "box";
  }
  return "?";
}

RegionSpec::Kind parse_kind(const std::string& name) {
  for (auto k : {RegionSpec::Kind::D, RegionSpec::Kind::NLambda, RegionSpec::Kind::NLambdaComplement,
                 RegionSpec::Kind::OmegaLambda, RegionSpec::Kind::Q0Tilde, RegionSpec::Kind::Omega2,
                 RegionSpec::Kind::Omega2Product, RegionSpec::Kind::Box})
    if (kind_name(k) == name) return k;
  if (name == "N" || name == "N-lambda") return RegionSpec::Kind::NLambda;
  if (name == "Omega" || name == "omega" || name == "Omega-lambda") return RegionSpec::Kind::OmegaLambda;
  if (name == "Q0") return RegionSpec::Kind::Q0Tilde;
  throw Error("unknown region kind '" + name + "'");
}

std::string RegionSpec::name() const { return kind_name(kind); }

bool region_membership(const RegionSpec& spec, std::span<const double> x) {
  require(static_cast<int>(x.size()) == spec.n, "region_membership: dimension mismatch");
  const int n = spec.n;
  switch (spec.kind) {
    case RegionSpec::Kind::D: return in_d(x, n);
    case RegionSpec::Kind::NLambda: return in_n(x, n, spec.cantor);
    case RegionSpec::Kind::NLambdaComplement: return !in_n(x, n, spec.cantor);
    case RegionSpec::Kind::OmegaLambda: return in_d(x, n) && !in_n(x, n, spec.cantor);
    case RegionSpec::Kind::Q0Tilde: return in_q0(x, n);
    case RegionSpec::Kind::Omega2: return in_omega2_planar(x[0], x[1], spec.cantor);
    case RegionSpec::Kind::Omega2Product:
      for (int i = 2; i < n; ++i)
        if (!(x[i] > -1.0 && x[i] < 1.0)) return false;
      return in_omega2_planar(x[0], x[1], spec.cantor);
    case RegionSpec::Kind::Box:
      for (int i = 0; i < n; ++i)
        if (!(x[i] > spec.box.lo[i] && x[i] < spec.box.hi[i])) return false;
      return true;
  }
  return false;
}

bool has_distance_oracle(const RegionSpec& spec) {
  return spec.kind == RegionSpec::Kind::NLambda || spec.kind == RegionSpec::Kind::NLambdaComplement ||
         spec.kind == RegionSpec::Kind::Box;
}

DistanceBracket boundary_distance(const RegionSpec& spec, std::span<const double> x) {
  require(static_cast<int>(x.size()) == spec.n, "boundary_distance: dimension mismatch");
  require(has_distance_oracle(spec), "boundary_distance: region '" + spec.name() + "' has no distance oracle");
  const int n = spec.n;
  if (spec.kind == RegionSpec::Kind::Box) {
    const Box& b = spec.box;
    bool inside = true;
    double interior = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!(x[i] > b.lo[i] && x[i] < b.hi[i])) inside = false;
      interior = std::min({interior, x[i] - b.lo[i], b.hi[i] - x[i]});
    }
    const double d = inside ? interior : distance_to_box(x, b);
    return {d, d};
  }

  // Clamp x' onto [0,1]^{n-1}; e is the excess in the x' directions.
  SmallPoint xc(n - 1);
  double e2 = 0.0;
  double lateral = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n - 1; ++i) {
    xc[i] = std::clamp(x[i], 0.0, 1.0);
    e2 += (x[i] - xc[i]) * (x[i] - xc[i]);
    lateral = std::min({lateral, xc[i], 1.0 - xc[i]});
  }
  const double t = std::abs(x[n - 1]);
  const double g = c_distance(xc.span(), spec.cantor);
  const double v = std::abs(t - g);
  DistanceBracket out;
  if (e2 == 0.0 && t <= g) {
    out = {std::min(v / kSqrt2, lateral), std::min(v, lateral)};
  } else if (e2 == 0.0) {
    out = {v / kSqrt2, v};
  } else {
    // |x - y|^2 >= e^2 + |(xc, t) - y|^2 for every y with y' in the unit cube.
    const double inner_lo = t <= g ? 0.0 : v / kSqrt2;
    const double inner_hi = t <= g ? 0.0 : v;
    const double e = std::sqrt(e2);
    out = {std::sqrt(e2 + inner_lo * inner_lo), e + inner_hi};
  }
  out.lo = std::max(0.0, out.lo - kSlack);
  out.hi += kSlack;
  return out;
}

namespace {

// Distance from (px, py) to the closed square |x - m| + |y| <= w.
double diamond_distance(double px, double py, double m, double w) {
  const double u = (px - m + py) / kSqrt2;
  const double v = (px - m - py) / kSqrt2;
  const double s = w / kSqrt2;
  const double du = std::max(0.0, std::abs(u) - s);
  const double dv = std::max(0.0, std::abs(v) - s);
  return std::hypot(du, dv);
}

}  // namespace

double planar_distance_to_n(double x, double y, const CantorSpec& spec, double tol) {
  require(spec.codim == 1, "planar_distance_to_n: needs a 1-D Cantor set");
  const double ay = std::abs(y);
  double best = std::numeric_limits<double>::infinity();
  if (x >= 0.0 && x <= 1.0) {
    const double g = k_distance(x, spec, tol);
    if (ay <= g) return 0.0;
    best = ay - g;
  }
  struct Node {
    double a;
    double len;
    int level;
  };
  std::vector<Node> stack{{0.0, 1.0, 0}};
  while (!stack.empty()) {
    const Node nd = stack.back();
    stack.pop_back();
    const double lam = nd.level < spec.max_depth ? spec.ratio(nd.level) : 0.5;
    const double height = spec.kind == CantorSpec::Kind::FixedRatio ? (1.0 - 2.0 * spec.lambda) * nd.len / 2.0
                                                                   : nd.len / 2.0;
    // Lower bound: distance to the box enclosing N over this interval.
    const double dx = x < nd.a ? nd.a - x : (x > nd.a + nd.len ? x - nd.a - nd.len : 0.0);
    const double dy = std::max(0.0, ay - height);
    if (std::hypot(dx, dy) >= best) continue;
    if (nd.len < tol || nd.level >= spec.max_depth) {
      // N over this interval is (within tol) the segment itself.
      best = std::min(best, std::hypot(dx, ay));
      continue;
    }
    const double gap_lo = nd.a + lam * nd.len;
    const double gap_hi = nd.a + nd.len - lam * nd.len;
    if (gap_hi > gap_lo) {
      const double w = (gap_hi - gap_lo) / 2.0;
      best = std::min(best, diamond_distance(x, ay, gap_lo + w, w));
    }
    const Node left{nd.a, lam * nd.len, nd.level + 1};
    const Node right{gap_hi, lam * nd.len, nd.level + 1};
    // Visit the nearer child first.
    if (std::abs(x - (left.a + left.len / 2)) < std::abs(x - (right.a + right.len / 2))) {
      stack.push_back(right);
      stack.push_back(left);
    } else {
      stack.push_back(left);
      stack.push_back(right);
    }
  }
  return best;
}

DistanceBracket refined_boundary_distance(const RegionSpec& spec, std::span<const double> x) {
  DistanceBracket b = boundary_distance(spec, x);
  if (spec.kind == RegionSpec::Kind::Box || spec.n != 2 || spec.cantor.kind != CantorSpec::Kind::FixedRatio)
    return b;
  double exact;
  const double t = std::abs(x[1]);
  if (x[0] >= 0.0 && x[0] <= 1.0 && t <= k_distance(x[0], spec.cantor)) {
    // Inside a diamond the nearest side is at perpendicular distance (g - |y|)/sqrt 2.
    exact = (k_distance(x[0], spec.cantor) - t) / kSqrt2;
  } else {
    exact = planar_distance_to_n(x[0], x[1], spec.cantor);
  }
  b.lo = std::max(b.lo, exact - kSlack);
  b.hi = std::min(b.hi, exact + kSlack);
  if (b.lo > b.hi) b.lo = b.hi = exact;
  return b;
}

std::int32_t ComponentMap::side_label(std::span<const double> p, int side) const {
  const int n = grid.n;
  double best = std::numeric_limits<double>::infinity();
  std::int32_t label = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    const SmallPoint c = grid.center(i);
    if (side * (c[n - 1] - p[n - 1]) <= 0.0) continue;
    const double d = distance(c.span(), p);
    if (d < best) {
      best = d;
      label = labels[i];
    }
  }
  return label;
}

ComponentMap component_label(const RegionSpec& spec, std::span<const double> center, double radius,
                             double h) {
  require(static_cast<int>(center.size()) == spec.n, "component_label: dimension mismatch");
  require(radius > 0.0, "component_label: radius must be positive");
  require(h > 0.0 && h <= radius / 16.0 * (1.0 + 1e-12), "component_label: need h <= radius/16");
  const int n = spec.n;
  Box window;
  for (int i = 0; i < n; ++i) {
    window.lo.push_back(center[i] - radius);
    window.hi.push_back(center[i] + radius);
  }
  ComponentMap out;
  out.grid = GridGeometry::covering(window, h);
  const GridGeometry& g = out.grid;
  const std::size_t cells = g.size();
  std::vector<std::uint8_t> inside(cells, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    const SmallPoint c = g.center(i);
    if (distance(c.span(), center) < radius && region_membership(spec, c.span())) inside[i] = 1;
  }
  out.labels.assign(cells, -1);
  std::deque<std::size_t> queue;
  std::array<std::int64_t, kMaxDim> local{};
  for (std::size_t seed = 0; seed < cells; ++seed) {
    if (!inside[seed] || out.labels[seed] >= 0) continue;
    const std::int32_t label = out.count++;
    std::int64_t size = 0;
    out.labels[seed] = label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      ++size;
      g.unravel(cur, local);
      const SmallPoint c = g.center(cur);
      for (int axis = 0; axis < n; ++axis) {
        for (int dir = -1; dir <= 1; dir += 2) {
          const std::int64_t m = local[axis] + dir;
          if (m < 0 || m >= g.dims[axis]) continue;
          const std::size_t nb = dir > 0 ? cur + g.stride(axis) : cur - g.stride(axis);
          if (!inside[nb] || out.labels[nb] >= 0) continue;
          SmallPoint mid = c;
          mid[axis] += dir * h / 2.0;
          if (!region_membership(spec, mid.span())) continue;
          out.labels[nb] = label;
          queue.push_back(nb);
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

std::int32_t component_at(const ComponentMap& map, const RegionSpec& spec, std::span<const double> x) {
  if (!region_membership(spec, x)) return -1;
  const GridGeometry& g = map.grid;
  const std::int64_t idx = g.find(x);
  if (idx < 0) return -1;
  const std::int32_t own = map.labels[static_cast<std::size_t>(idx)];
  if (own >= 0) return own;
  const int n = g.n;
  std::array<std::int64_t, kMaxDim> base{}, k{};
  g.unravel(static_cast<std::size_t>(idx), base);
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  double best = std::numeric_limits<double>::infinity();
  std::int32_t found = -1;
  for (int t = 0; t < total; ++t) {
    int rem = t;
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      k[i] = base[i] + rem % 3 - 1;
      rem /= 3;
      inside = inside && k[i] >= 0 && k[i] < g.dims[i];
    }
    if (!inside) continue;
    const std::size_t c = g.ravel(k);
    if (map.labels[c] < 0) continue;
    const SmallPoint ctr = g.center(c);
    const double d = distance(ctr.span(), x);
    if (d >= best) continue;
    bool clear = true;
    for (int s = 1; s < 8 && clear; ++s) {
      SmallPoint m = ctr;
      for (int i = 0; i < n; ++i) m[i] = x[i] + (ctr[i] - x[i]) * s / 8.0;
      clear = region_membership(spec, m.span());
    }
    if (clear) {
      best = d;
      found = map.labels[c];
    }
  }
  return found;
}

TwoSidedSample two_sided_sample(const RegionSpec& spec, int depth, bool verify, double cells_per_radius) {
  require(spec.kind == RegionSpec::Kind::OmegaLambda, "two_sided_sample: region must be Omega_lambda");
  require(spec.cantor.kind == CantorSpec::Kind::FixedRatio, "two_sided_sample: needs a fixed-ratio Cantor set");
  require(depth >= 0 && depth <= spec.cantor.max_depth, "two_sided_sample: depth exceeds Cantor max_depth");
  require(cells_per_radius >= 32.0, "two_sided_sample: need at least 32 cells per radius");
  TwoSidedSample out;
  out.depth = depth;
  const double r = std::pow(spec.cantor.lambda, depth);
  for (Point p : product_corners(spec.cantor, depth)) {
    p.push_back(0.0);
    TwoSidedPoint tp;
    tp.leftmost = std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
    tp.point = p;
    if (verify) {
      const double h = r / cells_per_radius;
      const ComponentMap outer = component_label(spec, p, r, h);
      const ComponentMap inner = component_label(spec, p, r / 2.0, h);
      tp.count_outer = outer.count;
      tp.count_inner = inner.count;
      tp.upper = outer.side_label(p, +1);
      tp.lower = outer.side_label(p, -1);
      const std::int32_t in_up = inner.side_label(p, +1);
      const std::int32_t in_lo = inner.side_label(p, -1);
      bool nested = tp.upper >= 0 && tp.lower >= 0 && tp.upper != tp.lower && in_up >= 0 && in_lo >= 0 &&
                    in_up != in_lo;
      for (std::size_t i = 0; nested && i < inner.labels.size(); ++i) {
        const std::int32_t l = inner.labels[i];
        if (l != in_up && l != in_lo) continue;
        const SmallPoint c = inner.grid.center(i);
        const std::int32_t lo = outer.label_at(c.span());
        if (l == in_up && lo != tp.upper) nested = false;
        if (l == in_lo && lo != tp.lower) nested = false;
      }
      tp.nested = nested;
      tp.verified = tp.count_outer >= 2 && nested;
      if (!tp.verified) ++out.failures;
    }
    out.points.push_back(std::move(tp));
  }
  return out;
}

bool omega2_membership(std::span<const double> x, int depth) {
  require(x.size() == 2, "omega2_membership: point must be planar");
  return in_omega2_planar(x[0], x[1], fat_thin_cantor(depth));
}

}  // namespace slitlab
