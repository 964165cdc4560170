#include "slitlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "slitlab/parallel.hpp"

namespace slitlab {

std::size_t GridField::masked_count() const {
  std::size_t c = 0;
  for (auto m : mask) c += m != 0;
  return c;
}

GridField GridField::zeros(const GridGeometry& grid, int components) {
  require(components >= 1, "GridField: need at least one component");
  GridField f;
  f.grid = grid;
  f.components = components;
  f.values.assign(grid.size() * static_cast<std::size_t>(components), 0.0);
  f.mask.assign(grid.size(), 0);
  f.links.assign(grid.size(), 0);
  f.flags.assign(grid.size(), 0);
  return f;
}

GridGeometry aligned_grid(const Box& window, double h) {
  require(h > 0.0 && std::isfinite(h), "grid: spacing must be positive and finite");
  for (int i = 0; i < window.dim(); ++i) {
    for (double v : {window.lo[i], window.hi[i]}) {
      const double q = v / h;
      if (std::abs(q - std::round(q)) > 1e-9) {
        std::ostringstream os;
        os << "grid: window coordinate " << v << " on axis " << i << " is not a multiple of h = " << h;
        throw Error(os.str());
      }
    }
    require(window.hi[i] > window.lo[i], "grid: empty window");
  }
  return GridGeometry::covering(window, h);
}

void assign_region_mask(GridField& f, const RegionSpec& region) {
  const auto& g = f.grid;
  require(g.n == region.n, "assign_region_mask: dimension mismatch");
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) f.mask[c] = region_membership(region, g.center(c).span()) ? 1 : 0;
  });
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    std::array<std::int64_t, kMaxDim> local{};
    for (std::size_t c = b; c < e; ++c) {
      std::uint8_t bits = 0;
      if (f.mask[c]) {
        g.unravel(c, local);
        const SmallPoint x = g.center(c);
        for (int a = 0; a < g.n; ++a) {
          if (local[a] + 1 >= g.dims[a]) continue;
          const std::size_t nb = c + g.stride(a);
          if (!f.mask[nb]) continue;
          SmallPoint mid = x;
          mid[a] += 0.5 * g.h;
          if (region_membership(region, mid.span())) bits |= static_cast<std::uint8_t>(1u << a);
        }
      }
      f.links[c] = bits;
    }
  });
}

GridField grid_sample(const ScalarFunction& f, const RegionSpec& region, double h, const std::optional<Box>& window) {
  const GridGeometry g = window ? aligned_grid(*window, h) : GridGeometry::covering(region.bbox, h);
  GridField out = GridField::zeros(g, 1);
  assign_region_mask(out, region);
  std::vector<std::int64_t> bad(g.size(), -1);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      if (!out.mask[c]) continue;
      const double v = f(g.center(c).span());
      if (!std::isfinite(v)) bad[c] = static_cast<std::int64_t>(c);
      out.values[c] = v;
    }
  });
  for (auto c : bad) {
    if (c < 0) continue;
    const SmallPoint x = g.center(static_cast<std::size_t>(c));
    std::ostringstream os;
    os << "grid_sample: non-finite value at (";
    for (int i = 0; i < x.n; ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    throw Error(os.str());
  }
  return out;
}

GridField gradient(const GridField& u) {
  const auto& g = u.grid;
  const int n = g.n;
  GridField out = GridField::zeros(g, n * u.components);
  out.mask = u.mask;
  out.links = u.links;
  std::array<std::size_t, kMaxDim> stride{};
  for (int a = 0; a < n; ++a) stride[a] = g.stride(a);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    std::array<std::int64_t, kMaxDim> local{};
    for (std::size_t c = b; c < e; ++c) {
      if (!u.mask[c]) continue;
      g.unravel(c, local);
      std::uint8_t flag = 0;
      for (int a = 0; a < n; ++a) {
        const bool plus = u.linked(c, a);
        const bool minus = local[a] > 0 && u.linked(c - stride[a], a);
        for (int k = 0; k < u.components; ++k) {
          double d = 0.0;
          const double here = u.value(c, k);
          if (plus && minus) {
            d = (u.value(c + stride[a], k) - u.value(c - stride[a], k)) / (2.0 * g.h);
          } else if (plus) {
            d = (u.value(c + stride[a], k) - here) / g.h;
          } else if (minus) {
            d = (here - u.value(c - stride[a], k)) / g.h;
          } else {
            flag |= static_cast<std::uint8_t>(1u << a);
          }
          out.value(c, k * n + a) = d;
        }
      }
      out.flags[c] = flag;
    }
  });
  return out;
}

double energy_p(const GridField& g, double p, const std::vector<std::uint8_t>* submask) {
  require(p >= 1.0 && std::isfinite(p), "energy_p: need p >= 1");
  const std::size_t m = g.size();
  if (submask) require(submask->size() == m, "energy_p: submask size mismatch");
  std::vector<double> terms(m, 0.0);
  std::vector<char> used(m, 0);
  const double vol = g.grid.cell_volume();
  parallel_for(m, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      if (!g.mask[c] || (submask && !(*submask)[c])) continue;
      used[c] = 1;
      double s = 0.0;
      for (int k = 0; k < g.components; ++k) s += g.value(c, k) * g.value(c, k);
      terms[c] = std::pow(s, 0.5 * p) * vol;
    }
  });
  if (std::find(used.begin(), used.end(), 1) == used.end()) {
    std::cerr << "warning: energy over an empty mask\n";
    return 0.0;
  }
  return pairwise_sum(terms);
}

double seminorm_p(const GridField& g, double p, const std::vector<std::uint8_t>* submask) {
  return std::pow(energy_p(g, p, submask), 1.0 / p);
}

void BoxUnion::add_box(Box b) {
  require(b.dim() == n, "BoxUnion: box dimension mismatch");
  for (int i = 0; i < n; ++i) require(b.lo[i] <= b.hi[i], "BoxUnion: inverted box");
  boxes.push_back(std::move(b));
}

void BoxUnion::add_ball(Point c, double r) {
  require(static_cast<int>(c.size()) == n, "BoxUnion: ball dimension mismatch");
  require(r >= 0.0, "BoxUnion: negative radius");
  balls.push_back({std::move(c), r});
}

bool BoxUnion::contains(std::span<const double> x) const {
  for (const auto& b : boxes)
    if (b.contains(x)) return true;
  for (const auto& b : balls)
    if (distance(x, b.center) <= b.radius) return true;
  return false;
}

Box BoxUnion::bounds() const {
  require(!empty(), "BoxUnion: bounds of an empty union");
  Box out;
  out.lo.assign(static_cast<std::size_t>(n), INFINITY);
  out.hi.assign(static_cast<std::size_t>(n), -INFINITY);
  for (const auto& b : boxes)
    for (int i = 0; i < n; ++i) {
      out.lo[i] = std::min(out.lo[i], b.lo[i]);
      out.hi[i] = std::max(out.hi[i], b.hi[i]);
    }
  for (const auto& b : balls)
    for (int i = 0; i < n; ++i) {
      out.lo[i] = std::min(out.lo[i], b.center[i] - b.radius);
      out.hi[i] = std::max(out.hi[i], b.center[i] + b.radius);
    }
  return out;
}

namespace {

// Shapes of P_m(F) in the n-1 remaining coordinates.
struct Projected {
  int d = 1;
  std::vector<Box> boxes;
  std::vector<Ball> balls;
};

Projected project(const BoxUnion& F, int m) {
  require(m >= 1 && m <= F.n, "projection: axis out of range");
  Projected p;
  p.d = F.n - 1;
  const int drop = m - 1;
  for (const auto& b : F.boxes) {
    Box q;
    for (int i = 0; i < F.n; ++i) {
      if (i == drop) continue;
      q.lo.push_back(b.lo[i]);
      q.hi.push_back(b.hi[i]);
    }
    p.boxes.push_back(std::move(q));
  }
  for (const auto& b : F.balls) {
    Ball q;
    for (int i = 0; i < F.n; ++i)
      if (i != drop) q.center.push_back(b.center[i]);
    q.radius = b.radius;
    p.balls.push_back(std::move(q));
  }
  return p;
}

double interval_union(std::vector<std::pair<double, double>> iv) {
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  double lo = 0.0, hi = 0.0;
  bool open = false;
  for (const auto& [a, b] : iv) {
    if (!open) {
      lo = a;
      hi = b;
      open = true;
    } else if (a <= hi) {
      hi = std::max(hi, b);
    } else {
      total += hi - lo;
      lo = a;
      hi = b;
    }
  }
  if (open) total += hi - lo;
  return total;
}

double pixel_count(const Projected& p, double h) {
  Box bounds;
  bounds.lo.assign(static_cast<std::size_t>(p.d), INFINITY);
  bounds.hi.assign(static_cast<std::size_t>(p.d), -INFINITY);
  for (const auto& b : p.boxes)
    for (int i = 0; i < p.d; ++i) {
      bounds.lo[i] = std::min(bounds.lo[i], b.lo[i]);
      bounds.hi[i] = std::max(bounds.hi[i], b.hi[i]);
    }
  for (const auto& b : p.balls)
    for (int i = 0; i < p.d; ++i) {
      bounds.lo[i] = std::min(bounds.lo[i], b.center[i] - b.radius);
      bounds.hi[i] = std::max(bounds.hi[i], b.center[i] + b.radius);
    }
  const GridGeometry g = GridGeometry::covering(bounds.inflated(h), h);
  require(g.size() <= (std::size_t{1} << 28), "projection: pixel grid too large");
  std::vector<std::uint8_t> hit(g.size(), 0);

  auto range = [&](int axis, double lo, double hi, std::int64_t& a, std::int64_t& b) {
    // centers (first + k + 1/2) h inside [lo, hi]
    a = static_cast<std::int64_t>(std::ceil(lo / h - 0.5)) - g.first[axis];
    b = static_cast<std::int64_t>(std::floor(hi / h - 0.5)) - g.first[axis];
    a = std::max<std::int64_t>(a, 0);
    b = std::min<std::int64_t>(b, g.dims[axis] - 1);
  };
  auto raster = [&](const std::array<std::int64_t, kMaxDim>& a, const std::array<std::int64_t, kMaxDim>& b,
                    const Ball* ball) {
    for (int i = 0; i < p.d; ++i)
      if (a[i] > b[i]) return;
    std::array<std::int64_t, kMaxDim> k = a;
    while (true) {
      bool in = true;
      if (ball) {
        double s = 0.0;
        for (int i = 0; i < p.d; ++i) {
          const double c = (static_cast<double>(g.first[i] + k[i]) + 0.5) * h - ball->center[i];
          s += c * c;
        }
        in = s <= ball->radius * ball->radius;
      }
      if (in) hit[g.ravel(k)] = 1;
      int i = p.d - 1;
      while (i >= 0 && k[i] == b[i]) {
        k[i] = a[i];
        --i;
      }
      if (i < 0) break;
      ++k[i];
    }
  };
  for (const auto& bx : p.boxes) {
    std::array<std::int64_t, kMaxDim> a{}, b{};
    for (int i = 0; i < p.d; ++i) range(i, bx.lo[i], bx.hi[i], a[i], b[i]);
    raster(a, b, nullptr);
  }
  for (const auto& bl : p.balls) {
    std::array<std::int64_t, kMaxDim> a{}, b{};
    for (int i = 0; i < p.d; ++i) range(i, bl.center[i] - bl.radius, bl.center[i] + bl.radius, a[i], b[i]);
    raster(a, b, &bl);
  }
  std::size_t count = 0;
  for (auto v : hit) count += v;
  return static_cast<double>(count) * std::pow(h, p.d);
}

}  // namespace

double projection_measure_pixels(const BoxUnion& F, int m, double h) {
  require(h > 0.0, "projection: pixel size must be positive");
  if (F.empty()) return 0.0;
  return pixel_count(project(F, m), h);
}

ProjectionMeasure projection_measure(const BoxUnion& F, int m, double pixel) {
  ProjectionMeasure out;
  if (F.empty()) {
    out.exact = true;
    return out;
  }
  const Projected p = project(F, m);
  if (p.d == 1) {
    std::vector<std::pair<double, double>> iv;
    for (const auto& b : p.boxes) iv.emplace_back(b.lo[0], b.hi[0]);
    for (const auto& b : p.balls) iv.emplace_back(b.center[0] - b.radius, b.center[0] + b.radius);
    out.value = interval_union(std::move(iv));
    out.exact = true;
    return out;
  }
  double h = pixel;
  double boundary = 0.0;
  double feature = INFINITY;
  for (const auto& b : p.boxes) {
    double area = 0.0;
    for (int i = 0; i < p.d; ++i) {
      double face = 2.0;
      for (int j = 0; j < p.d; ++j)
        if (j != i) face *= b.hi[j] - b.lo[j];
      area += face;
      if (b.hi[i] > b.lo[i]) feature = std::min(feature, b.hi[i] - b.lo[i]);
    }
    boundary += area;
  }
  for (const auto& b : p.balls) {
    boundary += p.d * unit_ball_volume(p.d) * std::pow(b.radius, p.d - 1);
    if (b.radius > 0.0) feature = std::min(feature, 2.0 * b.radius);
  }
  const Box bb = F.bounds();
  double extent = 0.0;
  for (int i = 0; i < F.n; ++i) extent = std::max(extent, bb.hi[i] - bb.lo[i]);
  if (h <= 0.0) {
    h = std::isfinite(feature) ? feature / 64.0 : extent / 1024.0;
    const double floor_h = extent / std::pow(4.0e6, 1.0 / p.d);
    h = std::max(h, floor_h);
    h = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(h))));
  }
  out.value = pixel_count(p, h);
  out.error_bound = boundary * h * std::sqrt(static_cast<double>(p.d));
  return out;
}

EnergyCheck poincare_energy_check(const Box& Q, const BoxUnion& F, const GridField& f, double delta, double p,
                                  double level_tol) {
  const int n = Q.dim();
  require(n == f.grid.n && n == F.n, "poincare_energy_check: dimension mismatch");
  require(f.components == 1, "poincare_energy_check: scalar field expected");
  const double l = Q.hi[0] - Q.lo[0];
  for (int i = 0; i < n; ++i)
    require(std::abs((Q.hi[i] - Q.lo[i]) - l) <= 1e-12 * std::max(1.0, l) && l > 0.0,
            "poincare_energy_check: Q must be a cube");
  const Box gb = f.grid.box();
  for (int i = 0; i < n; ++i)
    require(gb.lo[i] <= Q.lo[i] + 1e-12 && gb.hi[i] >= Q.hi[i] - 1e-12,
            "poincare_energy_check: field window does not cover Q");

  if (!(p >= 1.0 && p < n)) {
    std::ostringstream os;
    os << "exponent clause: need 1 <= p < n, got p = " << p << ", n = " << n;
    throw HypothesisError("exponent", os.str());
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    std::ostringstream os;
    os << "delta clause: need 0 < delta <= 1, got " << delta;
    throw HypothesisError("delta", os.str());
  }
  if (!F.empty()) {
    const Box fb = F.bounds();
    for (int i = 0; i < n; ++i)
      if (fb.lo[i] < Q.lo[i] - 1e-12 || fb.hi[i] > Q.hi[i] + 1e-12)
        throw HypothesisError("containment", "containment clause: F is not contained in Q");
  }

  EnergyCheck out;
  out.projection_budget = delta / (2.0 * n * std::ldexp(1.0, n)) * std::pow(l, n - 1);
  for (int i = 1; i <= n; ++i) {
    const auto pm = projection_measure(F, i);
    out.projection.push_back(pm.value);
    if (pm.value > out.projection_budget) {
      std::ostringstream os;
      os << "projection clause: m(P_" << i << "(F)) = " << pm.value << " exceeds " << out.projection_budget;
      throw HypothesisError("projection", os.str());
    }
  }

  const auto& g = f.grid;
  Box half;
  for (int i = 0; i < n; ++i) {
    const double c = 0.5 * (Q.lo[i] + Q.hi[i]);
    half.lo.push_back(c - 0.25 * l);
    half.hi.push_back(c + 0.25 * l);
  }
  std::vector<std::uint8_t> in_q(g.size(), 0);
  std::int64_t zero = 0, one = 0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!f.mask[c]) continue;
    const SmallPoint x = g.center(c);
    if (!Q.contains(x.span())) continue;
    const double v = f.value(c);
    if (v < -level_tol || v > 1.0 + level_tol) {
      std::ostringstream os;
      os << "range clause: f = " << v << " outside [0, 1]";
      throw HypothesisError("range", os.str());
    }
    if (half.contains(x.span())) {
      if (std::abs(v) <= level_tol) ++zero;
      if (std::abs(v - 1.0) <= level_tol) ++one;
    }
    if (!F.contains(x.span())) in_q[c] = 1;
  }
  const double vol = g.cell_volume();
  out.mass_zero = static_cast<double>(zero) * vol;
  out.mass_one = static_cast<double>(one) * vol;
  out.mass_threshold = delta * std::pow(l, n) / std::ldexp(1.0, n);
  if (!(std::min(out.mass_zero, out.mass_one) > out.mass_threshold)) {
    std::ostringstream os;
    os << "level-set clause: min(m{f=0}, m{f=1}) = " << std::min(out.mass_zero, out.mass_one)
       << " is not above " << out.mass_threshold;
    throw HypothesisError("level-set", os.str());
  }

  const GridField grad = gradient(f);
  out.lhs = energy_p(grad, p, &in_q);
  out.scale = std::pow(delta, (n - p) / n) * std::pow(l, n - p);
  out.ratio = out.lhs / out.scale;
  return out;
}

}  // namespace slitlab
