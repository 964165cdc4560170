#include "slitlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "slitlab/parallel.hpp"

namespace slitlab {

namespace {

constexpr std::int64_t kBlock = 1 << 16;

std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SeparatedNet separated_net(const std::vector<Point>& candidates, double r, double candidate_spacing) {
  require(r > 0.0, "separated_net: r must be positive");
  SeparatedNet net;
  net.radius = r;
  net.candidate_spacing = candidate_spacing;
  if (candidate_spacing > r / 2.0) {
    net.certified = false;
    std::ostringstream os;
    os << "candidate spacing " << candidate_spacing << " is coarser than r/2 = " << r / 2.0
       << "; maximality not certified";
    net.warning = os.str();
  }
  for (const auto& c : candidates) {
    bool keep = true;
    for (const auto& p : net.points)
      if (distance(c, p) < r) {
        keep = false;
        break;
      }
    if (keep) net.points.push_back(c);
  }
  return net;
}

std::vector<Point> slit_candidates(const CantorSpec& spec, int n, double r, int* depth) {
  require(spec.kind == CantorSpec::Kind::FixedRatio, "slit_candidates: needs a fixed-ratio Cantor set");
  require(n >= 2, "slit_candidates: n must be at least 2");
  int m = 0;
  while (std::pow(spec.lambda, m) >= r / 4.0) ++m;
  require(m <= spec.max_depth && m <= 40, "slit_candidates: r too small for the construction depth");
  CantorSpec s = spec;
  s.codim = n - 1;
  std::vector<Point> out;
  for (auto& p : product_corners(s, m)) {
    p.push_back(0.0);
    out.push_back(std::move(p));
  }
  if (depth) *depth = m;
  return out;
}

SeparatedNet slit_net(const CantorSpec& spec, int n, double r) {
  int m = 0;
  const auto cands = slit_candidates(spec, n, r, &m);
  return separated_net(cands, r, std::pow(spec.lambda, m) * std::sqrt(static_cast<double>(n - 1)));
}

std::int64_t maximality_misses(const SeparatedNet& net, const CantorSpec& spec, int n, int probes,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::int64_t misses = 0;
  Point x(static_cast<std::size_t>(n), 0.0);
  for (int t = 0; t < probes; ++t) {
    for (int a = 0; a + 1 < n; ++a) {
      double v = 0.0, scale = 1.0;
      for (int d = 0; d < 48; ++d) {
        if (coin(rng)) v += scale * (1.0 - spec.lambda);
        scale *= spec.lambda;
      }
      x[static_cast<std::size_t>(a)] = v;
    }
    bool near = false;
    for (const auto& p : net.points)
      if (distance(x, p) <= net.radius) {
        near = true;
        break;
      }
    misses += !near;
  }
  return misses;
}

NetHierarchy build_hierarchy(const CantorSpec& spec, int n, int levels, Separation sep) {
  require(levels >= 0, "build_hierarchy: levels must be non-negative");
  NetHierarchy h;
  h.cantor = spec;
  h.n = n;
  h.base = spec.lambda;
  h.separation = sep;
  for (int i = 0; i <= levels; ++i) {
    NetLevel lv;
    lv.i = i;
    lv.ball_radius = std::pow(spec.lambda, i);
    lv.net = slit_net(spec, n, (sep == Separation::TwoLambda ? 2.0 : 1.0) * lv.ball_radius);
    h.levels.push_back(std::move(lv));
  }
  return h;
}

std::int64_t net_count(const NetHierarchy& h, int i, int k, int j) {
  require(i >= 0 && j >= 0 && i + j <= h.top(), "net_count: level not built");
  const auto& coarse = h.levels[static_cast<std::size_t>(i)];
  require(k >= 0 && k < static_cast<int>(coarse.net.points.size()), "net_count: net index out of range");
  const auto& fine = h.levels[static_cast<std::size_t>(i + j)];
  const Point& xk = coarse.net.points[static_cast<std::size_t>(k)];
  const double reach = coarse.ball_radius + fine.ball_radius;
  std::int64_t count = 0;
  for (const auto& p : fine.net.points) count += distance(p, xk) <= reach;
  return count;
}

DimensionEstimate dim_upper_estimate(const NetHierarchy& h, double step) {
  require(h.top() >= 2, "dim_upper_estimate: need at least 3 levels");
  require(step > 0.0, "dim_upper_estimate: step must be positive");
  struct Item {
    int i, k;
    std::vector<std::int64_t> counts;  // j = 1..top - i
  };
  std::vector<Item> items;
  for (int i = 0; i < h.top(); ++i) {
    const int nk = static_cast<int>(h.levels[static_cast<std::size_t>(i)].net.points.size());
    for (int k = 0; k < nk; ++k) {
      Item it{i, k, {}};
      for (int j = 1; i + j <= h.top(); ++j) it.counts.push_back(net_count(h, i, k, j));
      items.push_back(std::move(it));
    }
  }
  const double lam = h.base;
  DimensionEstimate est;
  est.truncation = h.top();
  const int steps = static_cast<int>(std::llround(h.n / step));
  for (int t = 1; t <= steps; ++t) {
    const double s = t * step;
    std::vector<CertificateRow> rows;
    bool ok = true;
    for (const auto& it : items) {
      bool found = false;
      for (std::size_t jj = 0; jj < it.counts.size() && !found; ++jj) {
        const int j = static_cast<int>(jj) + 1;
        const double thr = std::pow(lam, -j * s);
        if (static_cast<double>(it.counts[jj]) < thr) {
          rows.push_back({it.i, it.k, j, it.counts[jj], thr});
          found = true;
        }
      }
      if (!found) {
        ok = false;
        break;
      }
    }
    if (ok) {
      est.s = s;
      est.certified = true;
      est.certificate = std::move(rows);
      return est;
    }
  }
  est.s = steps * step;
  est.certified = false;
  return est;
}

BoxUnion removed_set(const NetHierarchy& h, int i) {
  require(i >= 0 && i < h.top(), "removed_set: need a finer level than i");
  BoxUnion F;
  F.n = h.n;
  for (int l = i + 1; l <= h.top(); ++l) {
    const auto& lv = h.levels[static_cast<std::size_t>(l)];
    for (const auto& p : lv.net.points) F.add_ball(p, lv.ball_radius);
  }
  return F;
}

DensityResult measure_density_check(const RegionSpec& region, const Point& x, const std::vector<double>& radii,
                                    std::int64_t samples, std::uint64_t seed, int side) {
  const int n = region.n;
  require(static_cast<int>(x.size()) == n, "measure_density: dimension mismatch");
  require(samples > 0, "measure_density: samples must be positive");
  require(side == 1 || side == -1, "measure_density: side must be +1 or -1");
  DensityResult out;
  out.side = side;
  out.seed = seed;
  const double vb = unit_ball_volume(n);
  bool any = false;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    require(r > 0.0, "measure_density: radii must be positive");
    DensityRadius row;
    row.r = r;
    row.samples = samples;
    const ComponentMap map = component_label(region, x, r, r / 128.0);
    const std::int32_t label = map.side_label(x, side);
    if (label < 0) {
      row.note = "no component on this side";
      out.per_radius.push_back(row);
      continue;
    }
    row.found = true;
    const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);
    parallel_for(
        static_cast<std::size_t>(blocks),
        [&](std::size_t b0, std::size_t b1) {
          std::vector<double> p(static_cast<std::size_t>(n));
          for (std::size_t b = b0; b < b1; ++b) {
            auto rng = block_rng(seed + 0x9E3779B97F4A7C15ull * (ri + 1), b);
            std::uniform_real_distribution<double> U(-1.0, 1.0);
            const std::int64_t first = static_cast<std::int64_t>(b) * kBlock;
            const std::int64_t count = std::min(kBlock, samples - first);
            std::int64_t local = 0;
            for (std::int64_t s = 0; s < count; ++s) {
              double rr;
              do {
                rr = 0.0;
                for (int a = 0; a < n; ++a) {
                  p[static_cast<std::size_t>(a)] = U(rng);
                  rr += p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)];
                }
              } while (rr >= 1.0);
              for (int a = 0; a < n; ++a) p[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] + r * p[static_cast<std::size_t>(a)];
              local += component_at(map, region, p) == label;
            }
            hits[b] = local;
          }
        },
        1);
    for (auto v : hits) row.hits += v;
    const double f = static_cast<double>(row.hits) / static_cast<double>(samples);
    row.c = vb * f;
    row.half_width = 1.96 * vb * std::sqrt(f * (1.0 - f) / static_cast<double>(samples));
    if (!any || row.c < out.c_fit) {
      out.c_fit = row.c;
      out.half_width = row.half_width;
      any = true;
    }
    out.per_radius.push_back(row);
  }
  return out;
}

}  // namespace slitlab
