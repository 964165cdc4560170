#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "slitlab/whitney.hpp"

using namespace slitlab;

namespace {

RegionSpec unit_square() {
  Box b;
  b.lo = {0.0, 0.0};
  b.hi = {1.0, 1.0};
  return RegionSpec::open_box(b);
}

RegionSpec nset(double lam) { return RegionSpec::make(RegionSpec::Kind::NLambda, 2, CantorSpec::fixed(lam)); }
RegionSpec ncomp(double lam) {
  return RegionSpec::make(RegionSpec::Kind::NLambdaComplement, 2, CantorSpec::fixed(lam));
}

struct Setup {
  WhitneyDecomposition w, wt;
  ReflectMap r;
};

const Setup& quarter8() {
  static const Setup s = [] {
    Setup out;
    out.w = whitney_decompose(nset(0.25), 8);
    out.wt = whitney_decompose(ncomp(0.25), 8);
    out.r = reflect_assign(out.w, out.wt);
    return out;
  }();
  return s;
}

DyadicCube cube(int gen, std::int64_t i, std::int64_t j) {
  DyadicCube c;
  c.gen = gen;
  c.n = 2;
  c.idx[0] = i;
  c.idx[1] = j;
  return c;
}

}  // namespace

TEST(Whitney, DyadicCubeGeometry) {
  const auto c = cube(3, 5, -2);
  EXPECT_EQ(c.side(), 0.125);
  EXPECT_EQ(c.lo(0), 0.625);
  EXPECT_EQ(c.hi(1), -0.125);
  EXPECT_EQ(c.child(3).gen, 4);
  EXPECT_EQ(c.child(3).idx[0], 11);
  EXPECT_EQ(c.child(3).idx[1], -3);
  EXPECT_EQ(c.child(3).ancestor_index(1, 3), -2);
  EXPECT_TRUE(cubes_touch(cube(2, 0, 0), cube(3, 2, 1)));
  EXPECT_FALSE(cubes_touch(cube(2, 0, 0), cube(3, 3, 1)));
  EXPECT_TRUE(cube(4, 3, 0).projection_within(cube(2, 0, 5)));
  EXPECT_FALSE(cube(2, 0, 5).projection_within(cube(4, 3, 0)));
}

TEST(Whitney, UnitSquare) {
  const auto w = whitney_decompose(unit_square(), 6);
  const auto rep = verify_whitney(w);
  EXPECT_EQ(rep.violations(), 0);
  EXPECT_GT(rep.resolved, 0);
  const double margin = 8.0 * std::sqrt(2.0) * std::ldexp(1.0, -6);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 20000; ++t) {
    const double x[] = {u(rng), u(rng)};
    const double d = std::min({x[0], x[1], 1.0 - x[0], 1.0 - x[1]});
    if (d <= margin) continue;
    ++checked;
    bool covered = false;
    for (std::size_t i = 0; i < w.cubes.size() && !covered; ++i)
      covered = w.resolved(static_cast<std::int32_t>(i)) && w.cubes[i].box().contains(x);
    EXPECT_TRUE(covered) << x[0] << ", " << x[1];
  }
  EXPECT_GT(checked, 7000);
}

TEST(Whitney, EmptyRegion) {
  Box b;
  b.lo = {0.25, 0.25};
  b.hi = {0.25, 0.75};
  const auto w = whitney_decompose(RegionSpec::open_box(b), 6);
  EXPECT_TRUE(w.cubes.empty());
}

TEST(Whitney, RejectsRegionWithoutOracle) {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  EXPECT_THROW(whitney_decompose(om, 6), Error);
}

TEST(Whitney, PlantedW4Fault) {
  const auto w = WhitneyDecomposition::from_cubes(unit_square(), 6, {cube(2, 0, 0), cube(5, 8, 0)},
                                                  {CubeStatus::Resolved, CubeStatus::Resolved});
  const auto rep = verify_whitney(w);
  EXPECT_EQ(rep.w4, 1);
}

TEST(Whitney, SlitDecompositionsSound) {
  const auto& s = quarter8();
  for (const auto* d : {&s.w, &s.wt}) {
    const auto rep = verify_whitney(*d);
    EXPECT_EQ(rep.violations(), 0);
    EXPECT_EQ(rep.face_crossings, 0);
    EXPECT_GT(rep.resolved, 0);
    EXPECT_GT(rep.frontier_fraction, 0.0);
    EXPECT_LT(rep.frontier_fraction, 1.0);
  }
}

TEST(Whitney, CentralFamily) {
  const auto& s = quarter8();
  const auto v = central_family(s.w);
  EXPECT_GE(v.size(), 2u);
  std::map<int, std::int64_t> per_gen;
  for (auto id : v) {
    const auto& c = s.w.cubes[static_cast<std::size_t>(id)];
    EXPECT_TRUE(c.idx[1] == 0 || c.idx[1] == -1);
    ++per_gen[c.gen];
  }
  for (std::size_t i = 0; i < s.w.cubes.size(); ++i) {
    const auto& c = s.w.cubes[i];
    if (!s.w.resolved(static_cast<std::int32_t>(i)) || s.r.in_v[i]) continue;
    EXPECT_TRUE(c.lo(1) >= 0.0 || c.hi(1) <= 0.0);
  }
  std::vector<std::int64_t> counts;
  for (int g = 4; g <= 8; ++g) counts.push_back(per_gen[g]);
  const double slope = fit_log2_slope(counts);
  EXPECT_GE(slope, 0.4);
  EXPECT_LE(slope, 0.6);
}

TEST(Whitney, ReflectMap) {
  const auto& s = quarter8();
  EXPECT_EQ(s.r.unassigned, 0);
  EXPECT_GT(s.r.assigned, 0);
  const auto audit = audit_reflect(s.w, s.wt, s.r);
  EXPECT_EQ(audit.failures(), 0);
  EXPECT_EQ(audit.checked, s.r.assigned);
  for (std::size_t i = 0; i < s.w.cubes.size(); ++i) {
    if (!s.w.resolved(static_cast<std::int32_t>(i))) continue;
    if (s.r.in_v[i]) {
      EXPECT_EQ(s.r.target[i], kQ0);
      continue;
    }
    const auto t = s.r.target[i];
    ASSERT_GE(t, 0);
    const auto& q = s.w.cubes[i];
    const auto& qt = s.wt.cubes[static_cast<std::size_t>(t)];
    EXPECT_LE(qt.side(), 2.0 * q.side());
    EXPECT_TRUE(q.projection_within(qt));
    EXPECT_EQ(q.center()[1] > 0.0, qt.center()[1] > 0.0);
  }
  // Same map from a second build.
  const auto again = reflect_assign(s.w, s.wt);
  EXPECT_EQ(again.target, s.r.target);
}

TEST(Whitney, Chains) {
  const auto& s = quarter8();
  const ChainGraph graph(s.wt);
  std::int32_t a = -1;
  for (std::size_t i = 0; i < s.wt.cubes.size(); ++i)
    if (s.wt.resolved(static_cast<std::int32_t>(i))) {
      a = static_cast<std::int32_t>(i);
      break;
    }
  ASSERT_GE(a, 0);
  EXPECT_EQ(graph.chain(a, a).length(), 1u);
  const auto& ca = s.wt.cubes[static_cast<std::size_t>(a)];
  std::int32_t b = -1;
  for (auto nb : s.wt.adjacency[static_cast<std::size_t>(a)]) {
    const auto& cb = s.wt.cubes[static_cast<std::size_t>(nb)];
    if (cb.gen == ca.gen) b = nb;
  }
  ASSERT_GE(b, 0);
  const auto ab = graph.chain(a, b);
  ASSERT_EQ(ab.length(), 2u);
  EXPECT_EQ(ab.nodes.front(), a);
  EXPECT_EQ(ab.nodes.back(), b);

  std::mt19937_64 rng(3);
  std::vector<std::int32_t> ids;
  for (std::size_t i = 0; i < s.wt.cubes.size(); ++i)
    if (s.wt.resolved(static_cast<std::int32_t>(i))) ids.push_back(static_cast<std::int32_t>(i));
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  for (int t = 0; t < 40; ++t) {
    const auto x = ids[pick(rng)], y = ids[pick(rng)];
    const auto fwd = graph.chain(x, y);
    const auto rev = graph.chain(x, y, ChainConstraint::None, true);
    EXPECT_EQ(fwd.length(), rev.length());
    for (std::size_t k = 1; k < fwd.nodes.size(); ++k) {
      const auto p = fwd.nodes[k - 1], q = fwd.nodes[k];
      if (p == kQ0 || q == kQ0) {
        EXPECT_TRUE(graph.touches_q0(p == kQ0 ? q : p));
      } else {
        EXPECT_TRUE(cubes_touch(s.wt.cubes[static_cast<std::size_t>(p)], s.wt.cubes[static_cast<std::size_t>(q)]));
      }
    }
  }
}

TEST(Whitney, ChainLengthBounded) {
  const auto& s = quarter8();
  const auto bound = chain_length_bound(s.w, s.wt, s.r);
  EXPECT_EQ(bound.unreachable, 0);
  EXPECT_GT(bound.pairs, 0);
  EXPECT_LE(bound.max_length, 12u);
}

TEST(Whitney, ClaimCountTruncation) {
  const auto& s = quarter8();
  const auto cc = claim_count(s.w, s.wt, s.r, 10);
  ASSERT_EQ(cc.max_count.size(), 11u);
  EXPECT_GT(cc.max_count[0], 0);
  // l(Q~) <= 1, so 2^k l(Q_i) with l(Q_i) >= 2^-8 cannot reach beyond k = 8.
  EXPECT_EQ(cc.max_count[9], 0);
  EXPECT_EQ(cc.max_count[10], 0);
}

TEST(Whitney, TilingMass) {
  // N_{1/4}: diamonds |x - m| + |y| <= w over the gaps of K, area w^2 / 2 * 4 = 2 w^2 each.
  const auto cs = CantorSpec::fixed(0.25);
  const int max_gen = 8;
  const auto w = whitney_decompose(nset(0.25), max_gen);
  double tiled = 0.0;
  for (const auto& c : w.cubes) tiled += c.side() * c.side();

  double perimeter = 0.0;
  double exact = 0.0;
  double gap = 0.5;  // gap lengths: (1 - 2 lambda) lambda^k, 2^k of them
  for (int k = 0; k < 40; ++k) {
    const double len = gap * std::pow(0.25, k);
    const double count = std::ldexp(1.0, k);
    exact += count * 0.5 * len * len;
    perimeter += count * 2.0 * std::sqrt(2.0) * len;
  }
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-0.5, 0.5);
  const int samples = 1 << 20;
  int hits = 0;
  for (int t = 0; t < samples; ++t) {
    const double x[] = {ux(rng), uy(rng)};
    hits += region_membership(nset(0.25), x);
  }
  const double mc = static_cast<double>(hits) / samples;
  const double sigma = std::sqrt(mc * (1.0 - mc) / samples);
  EXPECT_NEAR(mc, exact, 5.0 * sigma);
  const double bound = 2.0 * 2.0 * perimeter * std::ldexp(1.0, -max_gen);
  EXPECT_NEAR(tiled, mc, bound + 5.0 * sigma);
}
