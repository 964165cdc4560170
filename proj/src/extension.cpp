#include "slitlab/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "slitlab/parallel.hpp"

namespace slitlab {

namespace {

double ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}

double ramp_slope(double t) { return (t <= 0.0 || t >= 1.0) ? 0.0 : 6.0 * t * (1.0 - t); }

double bump_and_gradient(const DyadicCube& q, std::span<const double> x, std::array<double, kMaxDim>& grad) {
  const double eps = q.side() / 16.0;
  std::array<double, kMaxDim> f{}, df{};
  for (int i = 0; i < q.n; ++i) {
    const double lo = q.lo(i), hi = q.hi(i);
    f[i] = 1.0;
    if (x[i] < lo) {
      const double t = (x[i] - (lo - eps)) / eps;
      f[i] = ramp(t);
      df[i] = ramp_slope(t) / eps;
    } else if (x[i] > hi) {
      const double t = (hi + eps - x[i]) / eps;
      f[i] = ramp(t);
      df[i] = -ramp_slope(t) / eps;
    }
  }
  double v = 1.0;
  for (int i = 0; i < q.n; ++i) v *= f[i];
  for (int i = 0; i < q.n; ++i) {
    double d = df[i];
    for (int j = 0; j < q.n; ++j)
      if (j != i) d *= f[j];
    grad[i] = d;
  }
  return v;
}

// Local index range [a, b] of cells whose centers lie in the open interval (lo, hi).
bool open_range(const GridGeometry& g, int axis, double lo, double hi, std::int64_t& a, std::int64_t& b) {
  a = static_cast<std::int64_t>(std::floor(lo / g.h - 0.5)) + 1 - g.first[axis];
  b = static_cast<std::int64_t>(std::ceil(hi / g.h - 0.5)) - 1 - g.first[axis];
  a = std::max<std::int64_t>(a, 0);
  b = std::min<std::int64_t>(b, g.dims[axis] - 1);
  return a <= b;
}

// Calls fn(cell) for every cell of the window whose center lies in the open box.
template <class Fn>
void for_cells_in(const GridGeometry& g, const Box& box, Fn&& fn) {
  std::array<std::int64_t, kMaxDim> a{}, b{};
  for (int i = 0; i < g.n; ++i)
    if (!open_range(g, i, box.lo[i], box.hi[i], a[i], b[i])) return;
  std::array<std::int64_t, kMaxDim> k = a;
  while (true) {
    fn(g.ravel(k));
    int i = g.n - 1;
    while (i >= 0 && k[i] == b[i]) {
      k[i] = a[i];
      --i;
    }
    if (i < 0) break;
    ++k[i];
  }
}

}  // namespace

double whitney_bump(const DyadicCube& q, std::span<const double> x) {
  const double eps = q.side() / 16.0;
  double v = 1.0;
  for (int i = 0; i < q.n && v > 0.0; ++i) {
    const double lo = q.lo(i), hi = q.hi(i);
    if (x[i] < lo) v *= ramp((x[i] - (lo - eps)) / eps);
    else if (x[i] > hi) v *= ramp((hi + eps - x[i]) / eps);
  }
  return v;
}

double PartitionOfUnity::psi(std::size_t cell, std::int32_t id) const {
  if (!covered(cell)) return 0.0;
  const auto b = cube_ids.begin() + static_cast<std::ptrdiff_t>(offsets[cell]);
  const auto e = cube_ids.begin() + static_cast<std::ptrdiff_t>(offsets[cell + 1]);
  const auto it = std::lower_bound(b, e, id);
  if (it == e || *it != id) return 0.0;
  return weights[static_cast<std::size_t>(it - cube_ids.begin())];
}

std::size_t PartitionOfUnity::covered_count() const {
  std::size_t c = 0;
  for (auto h : home) c += h >= 0;
  return c;
}

PartitionOfUnity partition_of_unity(const WhitneyDecomposition& w, double h, const std::optional<Box>& window) {
  double min_side = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.cubes.size(); ++i)
    if (w.resolved(static_cast<std::int32_t>(i))) min_side = std::min(min_side, w.cubes[i].side());
  if (std::isfinite(min_side) && h > min_side / 8.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "partition_of_unity: h = " << h << " exceeds 1/8 of the smallest resolved side " << min_side;
    throw Error(os.str());
  }
  PartitionOfUnity pu;
  pu.grid = window ? aligned_grid(*window, h) : GridGeometry::covering(w.region.bbox, h);
  const auto& g = pu.grid;
  const std::size_t m = g.size();
  pu.home.assign(m, -1);
  std::vector<std::size_t> count(m + 1, 0);

  auto support = [](const DyadicCube& q) {
    Box b = q.box();
    return b.inflated(q.side() / 16.0);
  };
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    if (!w.resolved(static_cast<std::int32_t>(i))) continue;
    for_cells_in(g, support(w.cubes[i]), [&](std::size_t c) { ++count[c]; });
  }
  pu.offsets.assign(m + 1, 0);
  for (std::size_t c = 0; c < m; ++c) pu.offsets[c + 1] = pu.offsets[c] + count[c];
  pu.cube_ids.assign(pu.offsets[m], 0);
  pu.weights.assign(pu.offsets[m], 0.0);
  std::vector<std::size_t> fill(pu.offsets.begin(), pu.offsets.end() - 1);
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    const auto id = static_cast<std::int32_t>(i);
    if (!w.resolved(id)) continue;
    const DyadicCube& q = w.cubes[i];
    const Box closed = q.box();
    for_cells_in(g, support(q), [&](std::size_t c) {
      const SmallPoint x = g.center(c);
      pu.cube_ids[fill[c]] = id;
      pu.weights[fill[c]] = whitney_bump(q, x.span());
      ++fill[c];
      if (pu.home[c] < 0 && closed.contains(x.span())) pu.home[c] = id;
    });
  }
  parallel_for(m, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      if (pu.home[c] < 0) continue;
      double s = 0.0;
      for (std::size_t k = pu.offsets[c]; k < pu.offsets[c + 1]; ++k) s += pu.weights[k];
      for (std::size_t k = pu.offsets[c]; k < pu.offsets[c + 1]; ++k) pu.weights[k] /= s;
    }
  });
  return pu;
}

std::vector<double> scaled_gradient_by_gen(const PartitionOfUnity& pu, const WhitneyDecomposition& w) {
  const auto& g = pu.grid;
  const int n = g.n;
  std::vector<double> out(static_cast<std::size_t>(w.max_gen + 1), 0.0);
  std::vector<double> phi;
  std::vector<std::array<double, kMaxDim>> dphi;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!pu.covered(c)) continue;
    const SmallPoint x = g.center(c);
    const std::size_t k0 = pu.offsets[c], k1 = pu.offsets[c + 1];
    phi.assign(k1 - k0, 0.0);
    dphi.assign(k1 - k0, {});
    double s = 0.0;
    std::array<double, kMaxDim> ds{};
    for (std::size_t k = k0; k < k1; ++k) {
      const DyadicCube& q = w.cubes[static_cast<std::size_t>(pu.cube_ids[k])];
      phi[k - k0] = bump_and_gradient(q, x.span(), dphi[k - k0]);
      s += phi[k - k0];
      for (int a = 0; a < n; ++a) ds[a] += dphi[k - k0][a];
    }
    for (std::size_t k = k0; k < k1; ++k) {
      double norm2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d = (dphi[k - k0][a] * s - phi[k - k0] * ds[a]) / (s * s);
        norm2 += d * d;
      }
      const DyadicCube& q = w.cubes[static_cast<std::size_t>(pu.cube_ids[k])];
      auto& slot = out[static_cast<std::size_t>(q.gen)];
      slot = std::max(slot, std::sqrt(norm2) * q.side());
    }
  }
  return out;
}

double cube_average(const GridField& u, const Box& box, const RegionSpec& restrict) {
  const double h = u.grid.h;
  const GridGeometry lattice = GridGeometry::covering(box, h);
  double sum = 0.0;
  std::int64_t count = 0;
  for_cells_in(lattice, box, [&](std::size_t c) {
    const SmallPoint x = lattice.center(c);
    if (!region_membership(restrict, x.span())) return;
    const std::int64_t j = u.grid.find(x.span());
    if (j >= 0) {
      if (!u.mask[static_cast<std::size_t>(j)]) return;
      sum += u.value(static_cast<std::size_t>(j));
    }
    ++count;
  });
  if (count == 0) throw Error("cube_average: no masked cell inside the cube");
  return sum / static_cast<double>(count);
}

double q0_average(const GridField& u, const CantorSpec& cantor) {
  const int n = u.grid.n;
  const double h = u.grid.h;
  const double cells_per_half = 0.5 / h;
  require(std::abs(cells_per_half - std::round(cells_per_half)) < 1e-9, "q0_average: h must divide 1/2");
  const RegionSpec q0 = RegionSpec::make(RegionSpec::Kind::Q0Tilde, n, cantor);
  double sum = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!u.mask[c]) continue;
    if (region_membership(q0, u.grid.center(c).span())) sum += u.value(c);
  }
  const double k = 1.0 / h;
  const double count = std::pow(k, n - 2) * (9.0 * k * k - 4.0 * k * k);
  return sum / count;
}

ExtensionOperator::ExtensionOperator(const CantorSpec& cantor, int n, int max_gen, double h,
                                     const std::optional<Box>& window)
    : cantor_(cantor), n_(n), h_(h) {
  require(max_gen >= 4, "extension: max_gen must be at least 4");
  omega_ = RegionSpec::make(RegionSpec::Kind::OmegaLambda, n, cantor);
  nset_ = RegionSpec::make(RegionSpec::Kind::NLambda, n, cantor);
  dset_ = RegionSpec::make(RegionSpec::Kind::D, n, cantor);
  w_ = whitney_decompose(nset_, max_gen);
  wt_ = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambdaComplement, n, cantor), max_gen);
  r_ = reflect_assign(w_, wt_);
  pu_ = partition_of_unity(w_, h, window);
}

ExtensionResult ExtensionOperator::apply(const GridField& u) const {
  require(u.grid.n == n_ && u.components == 1, "extend: scalar field on the same dimension expected");
  require(std::abs(u.grid.h - h_) <= 1e-15 * h_, "extend: u must live on the operator's lattice");
  const auto& g = pu_.grid;
  const std::size_t m = g.size();
  ExtensionResult res;
  res.averages.assign(w_.cubes.size(), std::numeric_limits<double>::quiet_NaN());

  // Cubes whose bumps reach the window.
  std::vector<char> used(w_.cubes.size(), 0);
  for (std::size_t c = 0; c < m; ++c)
    if (pu_.covered(c))
      for (std::size_t k = pu_.offsets[c]; k < pu_.offsets[c + 1]; ++k) used[static_cast<std::size_t>(pu_.cube_ids[k])] = 1;
  std::vector<std::int32_t> missing;
  for (std::size_t i = 0; i < w_.cubes.size(); ++i)
    if (used[i] && r_.target[i] == kUnassigned) missing.push_back(static_cast<std::int32_t>(i));
  if (!missing.empty()) {
    std::ostringstream os;
    os << "extend: unassigned cubes in the support:";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 20); ++k) os << " " << missing[k];
    if (missing.size() > 20) os << " ... (" << missing.size() << " total)";
    throw Error(os.str());
  }

  std::map<std::int32_t, double> cache;
  std::optional<double> a0;
  for (std::size_t i = 0; i < w_.cubes.size(); ++i) {
    if (!used[i]) continue;
    const std::int32_t t = r_.target[i];
    if (t == kQ0) {
      if (!a0) a0 = q0_average(u, cantor_);
      res.averages[i] = *a0;
      continue;
    }
    auto it = cache.find(t);
    if (it == cache.end())
      it = cache.emplace(t, cube_average(u, wt_.cubes[static_cast<std::size_t>(t)].box(), omega_)).first;
    res.averages[i] = it->second;
  }

  res.eu = GridField::zeros(g, 1);
  res.resolved.assign(m, 0);
  res.v_weight.assign(m, 0);
  std::vector<std::uint8_t> in_omega(m, 0), uncovered(m, 0);
  parallel_for(m, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const SmallPoint x = g.center(c);
      if (region_membership(omega_, x.span())) {
        in_omega[c] = 1;
        res.eu.mask[c] = 1;
        const std::int64_t j = u.grid.find(x.span());
        if (j >= 0 && u.mask[static_cast<std::size_t>(j)]) res.eu.values[c] = u.value(static_cast<std::size_t>(j));
        continue;
      }
      if (!region_membership(nset_, x.span()) || !region_membership(dset_, x.span())) continue;
      if (!pu_.covered(c)) {
        uncovered[c] = 1;
        continue;
      }
      const std::size_t k0 = pu_.offsets[c], k1 = pu_.offsets[c + 1];
      const double ref = res.averages[static_cast<std::size_t>(pu_.cube_ids[k0])];
      double lo = ref, hi = ref, v = ref;
      for (std::size_t k = k0; k < k1; ++k) {
        const auto id = static_cast<std::size_t>(pu_.cube_ids[k]);
        const double a = res.averages[id];
        v += pu_.weights[k] * (a - ref);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        if (r_.in_v[id]) res.v_weight[c] = 1;
      }
      res.eu.values[c] = std::clamp(v, lo, hi);
      res.eu.mask[c] = 1;
      res.resolved[c] = 1;
    }
  });
  for (auto v : uncovered) res.uncovered_cells += v;
  res.excluded_volume = static_cast<double>(res.uncovered_cells) * g.cell_volume();

  parallel_for(m, [&](std::size_t b, std::size_t e) {
    std::array<std::int64_t, kMaxDim> local{};
    for (std::size_t c = b; c < e; ++c) {
      if (!res.eu.mask[c]) continue;
      g.unravel(c, local);
      const SmallPoint x = g.center(c);
      std::uint8_t bits = 0;
      for (int a = 0; a < g.n; ++a) {
        if (local[a] + 1 >= g.dims[a]) continue;
        const std::size_t nb = c + g.stride(a);
        if (!res.eu.mask[nb]) continue;
        SmallPoint mid = x;
        mid[a] += 0.5 * g.h;
        const bool ok = (in_omega[c] && in_omega[nb]) ? region_membership(omega_, mid.span())
                                                      : region_membership(dset_, mid.span());
        if (ok) bits |= static_cast<std::uint8_t>(1u << a);
      }
      res.eu.links[c] = bits;
    }
  });
  return res;
}

bool JumpFunction::in_component(std::span<const double> x) const {
  return component_at(map, region, x) == label;
}

double JumpFunction::operator()(std::span<const double> x) const {
  const double cut = std::max(0.0, std::min(1.0, 3.0 - distance(x, x0) / r));
  if (cut == 0.0) return 0.0;
  return in_component(x) ? cut : 0.0;
}

double JumpFunction::energy_bound(double p) const {
  const int n = region.n;
  return std::pow(3.0, n) * unit_ball_volume(n) * std::pow(r, n - p);
}

JumpFunction jump_test_function(const RegionSpec& region, Point x0, double r, int side, double h_map) {
  require(r > 0.0, "jump_test_function: r must be positive");
  require(static_cast<int>(x0.size()) == region.n, "jump_test_function: dimension mismatch");
  require(side == 1 || side == -1, "jump_test_function: side must be +1 or -1");
  JumpFunction f;
  f.region = region;
  f.x0 = std::move(x0);
  f.r = r;
  f.side = side;
  const double h = h_map > 0.0 ? h_map : 3.0 * r / 64.0;
  f.map = component_label(region, f.x0, 3.0 * r, h);
  f.label = f.map.side_label(f.x0, side);
  if (f.label < 0) throw Error("jump_test_function: selector matches no component");
  return f;
}

RatioResult ratio_p(const ExtensionOperator& E, const GridField& u, double p) {
  RatioResult out;
  out.denominator = seminorm_p(gradient(u), p);
  if (!(out.denominator > 0.0)) throw Error("ratio_p: zero seminorm of u");
  const ExtensionResult res = E.apply(u);
  out.numerator = seminorm_p(gradient(res.eu), p, &res.resolved);
  out.ratio = out.numerator / out.denominator;
  out.excluded_volume = res.excluded_volume;
  return out;
}

RatioResult jump_ratio(const CantorSpec& cantor, int n, double p, double h, int depth, double r) {
  require(cantor.kind == CantorSpec::Kind::FixedRatio, "jump_ratio: needs a fixed-ratio Cantor set");
  require(depth >= 1, "jump_ratio: depth must be at least 1");
  const double k = std::log2(1.0 / h);
  require(h > 0.0 && std::abs(k - std::round(k)) < 1e-9, "jump_ratio: h must be a power of 2");
  const ExtensionOperator E(cantor, n, static_cast<int>(std::lround(k)) - 3, h);
  Point x0(static_cast<std::size_t>(n), 0.0);
  x0[0] = 1.0 - std::pow(cantor.lambda, depth);
  const JumpFunction J = jump_test_function(E.omega(), x0, r, 1, h);
  Box win;
  for (int i = 0; i < n; ++i) {
    win.lo.push_back(std::floor((x0[static_cast<std::size_t>(i)] - 3.0 * r) / h - 2.0) * h);
    win.hi.push_back(std::ceil((x0[static_cast<std::size_t>(i)] + 3.0 * r) / h + 2.0) * h);
  }
  const GridField u = grid_sample([&](std::span<const double> x) { return J(x); }, E.omega(), h, win);
  return ratio_p(E, u, p);
}

TraceMismatch trace_mismatch(const ExtensionOperator& E, const ExtensionResult& res, const ScalarFunction& u,
                             double min_abs_y) {
  const auto& g = res.eu.grid;
  require(g.n == 2, "trace_mismatch: planar slits only");
  const auto& pu = E.partition();
  const auto& w = E.interior();
  const CantorSpec& cs = E.nset().cantor;
  double sum = 0.0;
  TraceMismatch out;
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!res.resolved[c] || res.v_weight[c]) continue;
    if (w.cubes[static_cast<std::size_t>(pu.home[c])].gen != w.max_gen) continue;
    const SmallPoint x = g.center(c);
    const double ay = std::abs(x[1]);
    if (ay < min_abs_y) continue;
    const double gx = k_distance(x[0], cs);
    // Foot of the perpendicular on the nearer side of the diamond.
    const double d = 0.5 * (gx - ay);
    const double s = k_distance(std::min(1.0, x[0] + gx), cs) <= 1e-12 ? 1.0 : -1.0;
    const double foot[] = {x[0] + s * d, std::copysign(ay + d, x[1])};
    sum += std::abs(res.eu.value(c) - u(foot));
    ++out.cells;
  }
  if (out.cells > 0) out.mean = sum / static_cast<double>(out.cells);
  return out;
}

NormFactor norm_factor(double lambda, int n, double p) {
  require(p > 1.0, "norm_factor: p must exceed 1");
  const double dim = cantor_dim(CantorSpec::fixed(lambda, n - 1), n);
  NormFactor out;
  const double e = (-n + p + dim) / p;
  if (e >= -1e-12) {
    out.diverges = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = 1.0 / (1.0 - std::exp2(e));
  return out;
}

double exponent_r(double dim, int n, double p) { return (p - 1.0) / (p * p) * (n - p - dim); }

double d_factor(double r, double p) {
  require(p > 1.0 && r > 0.0, "d_factor: need p > 1 and r > 0");
  return std::pow(1.0 - std::exp2(-r * p / (p - 1.0)), 1.0 - p);
}

double upper_curve(double x, int n, double p, double c) { return n - p - c / (std::pow(x, n) * std::log(x)); }

std::optional<double> improved_upper(double x, int n, double p, double c) {
  if (!(p > n - 1 && p < n)) return std::nullopt;
  return n - p - c / (std::pow(x, 2.0 * p - p * p / n) * std::log(x));
}

std::vector<BoundRow> bound_report(int n, double p, const std::vector<double>& lambdas, double c,
                                   const std::vector<std::optional<double>>& ratios) {
  require(ratios.empty() || ratios.size() == lambdas.size(), "bound_report: one ratio per lambda");
  std::vector<BoundRow> rows;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    BoundRow row;
    row.lambda = lambdas[i];
    row.dim = cantor_dim(CantorSpec::fixed(row.lambda, n - 1), n);
    row.factor = norm_factor(row.lambda, n, p);
    if (!ratios.empty()) row.empirical_ratio = ratios[i];
    if (row.factor.diverges) {
      row.c_eff = std::numeric_limits<double>::quiet_NaN();
      row.upper_curve = n - p;
    } else {
      row.c_eff = (n - p - row.dim) * row.factor.value;
      row.upper_curve = upper_curve(row.factor.value, n, p, c);
      row.improved = improved_upper(row.factor.value, n, p, c);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace slitlab
