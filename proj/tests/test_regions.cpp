#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "slitlab/regions.hpp"

using namespace slitlab;

namespace {

RegionSpec omega(double lam, int n = 2) {
  return RegionSpec::make(RegionSpec::Kind::OmegaLambda, n, CantorSpec::fixed(lam, n - 1));
}
RegionSpec nset(double lam, int n = 2) {
  return RegionSpec::make(RegionSpec::Kind::NLambda, n, CantorSpec::fixed(lam, n - 1));
}

// Minimum distance from (x, y) to samples of the sheets |y| = g(x) over [0,1].
double sampled_boundary_distance(double x, double y, const CantorSpec& c, int samples) {
  double best = 1e9;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const double g = k_distance(t, c);
    best = std::min({best, std::hypot(x - t, y - g), std::hypot(x - t, y + g)});
  }
  return best;
}

}  // namespace

TEST(Regions, MembershipExamples) {
  const double a[] = {0.5, 0.1};
  const double b[] = {-1.5, 0.0};
  const double c[] = {-0.5, 0.5};
  EXPECT_FALSE(region_membership(omega(0.25), a));
  EXPECT_TRUE(region_membership(omega(0.25), b));
  const auto d = RegionSpec::make(RegionSpec::Kind::D, 2, CantorSpec::fixed(0.25));
  EXPECT_FALSE(region_membership(d, c));
  const double bad[] = {0.1, 0.2, 0.3};
  EXPECT_THROW(region_membership(d, bad), Error);
}

TEST(Regions, PartitionAndSymmetry) {
  std::mt19937_64 rng(5);
  for (int n : {2, 3}) {
    const auto cs = CantorSpec::fixed(0.25, n - 1);
    const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, n, cs);
    const auto nn = RegionSpec::make(RegionSpec::Kind::NLambda, n, cs);
    const auto dd = RegionSpec::make(RegionSpec::Kind::D, n, cs);
    const Box bb = d_bbox(n);
    for (int t = 0; t < 20000; ++t) {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = std::uniform_real_distribution<double>(bb.lo[i], bb.hi[i])(rng);
      const bool in_o = region_membership(om, x);
      const bool in_n = region_membership(nn, x);
      const bool in_d = region_membership(dd, x);
      EXPECT_EQ(in_o, in_d && !in_n);
      Point y = x;
      y[n - 1] = -y[n - 1];
      EXPECT_EQ(in_n, region_membership(nn, y));
      if (in_n) EXPECT_LE(std::abs(x[n - 1]), 0.5);
      if (in_n) {
        for (int i = 0; i < n; ++i) EXPECT_TRUE(nn.bbox.contains(x));
      }
    }
  }
}

TEST(Regions, Q0AndOmega2) {
  const auto q0 = RegionSpec::make(RegionSpec::Kind::Q0Tilde, 2, CantorSpec::fixed(0.25));
  const double in[] = {-1.5, 0.0};
  const double hole[] = {0.5, 0.5};
  EXPECT_TRUE(region_membership(q0, in));
  EXPECT_FALSE(region_membership(q0, hole));
  const double p1[] = {-0.5, 0.0}, p2[] = {0.5, 0.0}, p3[] = {0.5, 0.9};
  EXPECT_TRUE(omega2_membership(p1, 12));
  EXPECT_FALSE(omega2_membership(p2, 12));
  EXPECT_TRUE(omega2_membership(p3, 12));
  EXPECT_LT(k_distance(0.5, fat_thin_cantor(12)), 0.9);
}

TEST(Regions, BoundaryDistanceExamples) {
  const auto nn = nset(0.25);
  const double a[] = {0.5, 0.5};
  auto br = boundary_distance(nn, a);
  EXPECT_NEAR(br.lo, 0.25 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(br.hi, 0.25, 1e-9);
  const double b[] = {0.5, 0.25};
  br = boundary_distance(nn, b);
  EXPECT_NEAR(br.lo, 0.0, 1e-9);
  EXPECT_NEAR(br.hi, 0.0, 1e-9);
  const double c[] = {0.5, 0.1};
  br = boundary_distance(nn, c);
  EXPECT_NEAR(br.lo, 0.15 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(br.hi, 0.15, 1e-9);
  const double bad[] = {0.5};
  EXPECT_THROW(boundary_distance(nn, bad), Error);
  EXPECT_THROW(boundary_distance(omega(0.25), a), Error);
}

TEST(Regions, BoundaryBracketsContainSampledDistance) {
  std::mt19937_64 rng(9);
  for (double lam : {0.25, 0.125}) {
    const auto nn = nset(lam);
    const int samples = 1 << 14;
    const double s = 1.0 / samples;
    for (int t = 0; t < 150; ++t) {
      const double x[] = {std::uniform_real_distribution<double>(-0.3, 1.3)(rng),
                          std::uniform_real_distribution<double>(-0.6, 0.6)(rng)};
      const double emp = sampled_boundary_distance(x[0], x[1], nn.cantor, samples);
      const auto br = boundary_distance(nn, x);
      EXPECT_LE(br.lo, br.hi);
      EXPECT_GE(emp, br.lo - s);
      EXPECT_LE(emp, br.hi + s);
      const auto rf = refined_boundary_distance(nn, x);
      EXPECT_GE(rf.lo, br.lo - 1e-12);
      EXPECT_LE(rf.hi, br.hi + 1e-12);
      EXPECT_NEAR(emp, 0.5 * (rf.lo + rf.hi), s + 1e-9) << x[0] << " " << x[1];
    }
  }
}

TEST(Regions, ComponentLabels) {
  const auto om = omega(0.25);
  const double origin[] = {0.0, 0.0};
  auto cm = component_label(om, origin, 0.25, 1.0 / 512);
  EXPECT_EQ(cm.count, 2);
  EXPECT_NE(cm.side_label(origin, 1), cm.side_label(origin, -1));
  const double inside[] = {-1.5, 0.0};
  EXPECT_EQ(component_label(om, inside, 0.2, 1.0 / 256).count, 1);
  const double far[] = {2.0, 2.0};
  EXPECT_EQ(component_label(om, far, 0.1, 1.0 / 256).count, 0);
  EXPECT_THROW(component_label(om, origin, 0.25, 0.1), Error);
}

TEST(Regions, ComponentLabelsDeterministicScanOrder) {
  const auto om = omega(0.25);
  const double origin[] = {0.0, 0.0};
  auto cm = component_label(om, origin, 0.25, 1.0 / 256);
  // Label 0 is the component of the first masked cell in scan order.
  std::int32_t first = -1;
  for (auto l : cm.labels)
    if (l >= 0) {
      first = l;
      break;
    }
  EXPECT_EQ(first, 0);
}

TEST(Regions, TwoSidedSample) {
  const auto s = two_sided_sample(omega(0.25), 3);
  EXPECT_EQ(s.points.size(), 8u);
  EXPECT_EQ(s.failures, 0);
  for (const auto& p : s.points) {
    EXPECT_EQ(p.point[1], 0.0);
    EXPECT_GE(p.count_outer, 2);
    EXPECT_TRUE(p.nested);
  }
  EXPECT_TRUE(s.points[0].leftmost);
  const auto s3 = two_sided_sample(omega(0.25, 3), 2, false);
  EXPECT_EQ(s3.points.size(), 16u);
}

TEST(Regions, TwoSidedSampleThreeDimensionalWitness) {
  const auto s = two_sided_sample(omega(0.25, 3), 1, true, 32);
  EXPECT_EQ(s.points.size(), 4u);
  for (const auto& p : s.points) EXPECT_GE(p.count_outer, 2);
}

TEST(Regions, TwoSidedCornersRefine) {
  const auto om = omega(0.25);
  const auto coarse = two_sided_sample(om, 2, false);
  const auto fine = two_sided_sample(om, 3, false);
  for (const auto& p : coarse.points) {
    bool found = false;
    for (const auto& q : fine.points) found = found || q.point == p.point;
    EXPECT_TRUE(found);
  }
}
