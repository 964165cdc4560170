#include <gtest/gtest.h>

#include <cmath>

#include "slitlab/dimension.hpp"
#include "slitlab/parallel.hpp"

using namespace slitlab;

namespace {

std::vector<Point> line_corners(double lam, int depth) {
  std::vector<Point> out;
  for (double x : construction_corners(CantorSpec::fixed(lam), depth)) out.push_back({x});
  return out;
}

}  // namespace

TEST(Nets, ExactCountsOnQuarterCantor) {
  for (int i = 1; i <= 6; ++i) {
    const double r = 2.0 * std::pow(0.25, i);
    const auto net = separated_net(line_corners(0.25, i), r, std::pow(0.25, i));
    EXPECT_EQ(net.points.size(), std::size_t{1} << i) << "i = " << i;
    const auto slit = slit_net(CantorSpec::fixed(0.25), 2, r);
    EXPECT_EQ(slit.points.size(), std::size_t{1} << i) << "i = " << i;
    EXPECT_TRUE(slit.certified);
  }
}

TEST(Nets, TrivialCases) {
  EXPECT_EQ(separated_net(line_corners(0.25, 5), 2.0, 0.01).points.size(), 1u);
  EXPECT_TRUE(separated_net({}, 0.1, 0.01).points.empty());
  const auto coarse = separated_net(line_corners(0.25, 1), 0.1, 0.25);
  EXPECT_FALSE(coarse.certified);
  EXPECT_FALSE(coarse.warning.empty());
  EXPECT_THROW(separated_net({}, 0.0, 0.01), Error);
}

TEST(Nets, SeparatedAndMaximal) {
  const auto cs = CantorSpec::fixed(0.125);
  std::size_t prev = 0;
  for (int i = 0; i <= 4; ++i) {
    const double r = std::pow(0.125, i);
    const auto net = slit_net(cs, 2, r);
    for (std::size_t a = 0; a < net.points.size(); ++a)
      for (std::size_t b = a + 1; b < net.points.size(); ++b) EXPECT_GE(distance(net.points[a], net.points[b]), r);
    EXPECT_EQ(maximality_misses(net, cs, 2, 100000, 7 + i), 0);
    EXPECT_GE(net.points.size(), prev);
    prev = net.points.size();
  }
}

TEST(Nets, Counts) {
  const auto h = build_hierarchy(CantorSpec::fixed(0.25), 2, 3);
  for (std::size_t k = 0; k < h.levels[1].net.points.size(); ++k) {
    EXPECT_GE(net_count(h, 1, static_cast<int>(k), 0), 1);
    const auto n2 = net_count(h, 1, static_cast<int>(k), 2);
    std::int64_t brute = 0;
    for (const auto& p : h.levels[3].net.points)
      brute += distance(p, h.levels[1].net.points[k]) <= 0.25 + 1.0 / 64.0;
    EXPECT_EQ(n2, brute);
    EXPECT_GE(n2, 1);
    EXPECT_LE(n2, static_cast<std::int64_t>(h.levels[3].net.points.size()));
  }
  EXPECT_THROW(net_count(h, 1, 0, 3), Error);

  NetHierarchy single = h;
  for (auto& lv : single.levels) lv.net.points.resize(1);
  for (int j = 0; j <= 2; ++j) EXPECT_EQ(net_count(single, 1, 0, j), 1);
}

TEST(Dimension, UpperEstimate) {
  for (double lam : {0.25, 0.125}) {
    const auto cs = CantorSpec::fixed(lam);
    const auto h = build_hierarchy(cs, 2, 5);
    const auto est = dim_upper_estimate(h);
    EXPECT_TRUE(est.certified);
    EXPECT_NEAR(est.s, cantor_dim(cs, 2), 0.05) << lam;
    EXPECT_GE(est.s, cantor_dim(cs, 2));
    EXPECT_FALSE(est.certificate.empty());
    for (const auto& row : est.certificate) EXPECT_LT(static_cast<double>(row.count), row.threshold);
  }
  const auto h2 = build_hierarchy(CantorSpec::fixed(0.125), 2, 4, Separation::TwoLambda);
  EXPECT_NEAR(dim_upper_estimate(h2).s, 1.0 / 3.0, 0.07);

  NetHierarchy single = build_hierarchy(CantorSpec::fixed(0.25), 2, 3);
  for (auto& lv : single.levels) lv.net.points.resize(1);
  EXPECT_DOUBLE_EQ(dim_upper_estimate(single).s, 0.01);
  EXPECT_THROW(dim_upper_estimate(build_hierarchy(CantorSpec::fixed(0.25), 2, 1)), Error);
}

TEST(Dimension, RemovedSetProjections) {
  const double lam = 0.25;
  const auto h = build_hierarchy(CantorSpec::fixed(lam), 2, 6);
  std::vector<double> m;
  for (int i = 0; i <= 3; ++i) {
    const auto F = removed_set(h, i);
    const auto exact = projection_measure(F, 2);
    ASSERT_TRUE(exact.exact);
    const double pix = projection_measure_pixels(F, 2, std::ldexp(1.0, -16));
    EXPECT_NEAR(pix, exact.value, 0.01 * exact.value);
    m.push_back(exact.value);
  }
  const double predicted = 2.0 * lam;
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_NEAR(m[i] / m[i - 1], predicted, 0.25 * predicted);
}

TEST(Density, TwoSidedPoint) {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  for (int side : {1, -1}) {
    const auto d = measure_density_check(om, {0.0, 0.0}, {0.25, 0.125, 0.0625}, 1000000, 42, side);
    ASSERT_EQ(d.per_radius.size(), 3u);
    for (const auto& row : d.per_radius) {
      EXPECT_TRUE(row.found);
      EXPECT_LE(row.half_width, 0.005);
    }
    EXPECT_GE(d.c_fit, 0.05);
  }
}

TEST(Density, InteriorBallAndRescaling) {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  const auto d = measure_density_check(om, {0.5, 0.75}, {0.1}, 200000, 3);
  EXPECT_NEAR(d.c_fit, M_PI, 1e-12);
  // Self-similarity of the quarter Cantor set: radii scaled by lambda give the same c.
  const auto a = measure_density_check(om, {0.0, 0.0}, {0.125}, 400000, 5);
  const auto b = measure_density_check(om, {0.0, 0.0}, {0.03125}, 400000, 6);
  EXPECT_NEAR(a.c_fit, b.c_fit, a.half_width + b.half_width);
}

TEST(Density, WorkerIndependent) {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  set_worker_count(1);
  const auto a = measure_density_check(om, {0.0, 0.0}, {0.125}, 300000, 11);
  set_worker_count(3);
  const auto b = measure_density_check(om, {0.0, 0.0}, {0.125}, 300000, 11);
  set_worker_count(0);
  EXPECT_EQ(a.per_radius[0].hits, b.per_radius[0].hits);
}
