#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "slitlab/cantor.hpp"

using namespace slitlab;

namespace {

// Brute-force distance to the finite set of depth-m interval endpoints.
double brute_k_distance(double x, const CantorSpec& s, int depth) {
  double best = 1e9;
  for (const Interval& iv : construction_intervals(s, depth))
    best = std::min({best, std::abs(x - iv.lo), std::abs(x - iv.hi)});
  return best;
}

}  // namespace

TEST(Cantor, KDistanceExamples) {
  const auto k4 = CantorSpec::fixed(0.25);
  EXPECT_EQ(k_distance(0.0, k4), 0.0);
  EXPECT_NEAR(k_distance(0.5, k4), brute_k_distance(0.5, k4, 12), 1e-12);
  EXPECT_NEAR(k_distance(0.5, k4), 0.25, 1e-12);
  EXPECT_NEAR(k_distance(-0.3, CantorSpec::fixed(0.3)), 0.3, 1e-15);
}

TEST(Cantor, KDistanceRejectsBadInput) {
  const auto k4 = CantorSpec::fixed(0.25);
  EXPECT_THROW(k_distance(std::nan(""), k4), Error);
  EXPECT_THROW(k_distance(INFINITY, k4), Error);
  EXPECT_THROW(k_distance(0.5, k4, 0.0), Error);
  EXPECT_THROW(k_distance(0.5, k4, -1.0), Error);
}

TEST(Cantor, KDistanceMatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.2, 1.2);
  for (double lam : {0.1, 0.25, 0.3, 0.45}) {
    const auto s = CantorSpec::fixed(lam);
    const int depth = 14;
    for (int t = 0; t < 300; ++t) {
      const double x = U(rng);
      EXPECT_NEAR(k_distance(x, s), brute_k_distance(x, s, depth), std::pow(lam, depth) + 1e-12)
          << "lambda " << lam << " x " << x;
    }
  }
}

TEST(Cantor, KDistanceLipschitzAndSymmetric) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.5, 1.5);
  const auto s = CantorSpec::fixed(0.2);
  for (int t = 0; t < 2000; ++t) {
    const double x = U(rng), y = U(rng);
    EXPECT_LE(std::abs(k_distance(x, s) - k_distance(y, s)), std::abs(x - y) + 2 * kCantorTol);
    EXPECT_NEAR(k_distance(x, s), k_distance(1.0 - x, s), kCantorTol);
  }
}

TEST(Cantor, EndpointsHaveZeroDistance) {
  const auto s = CantorSpec::fixed(0.25);
  for (int m = 0; m <= 10; ++m)
    for (const Interval& iv : construction_intervals(s, m)) {
      EXPECT_LE(k_distance(iv.lo, s), kCantorTol);
      EXPECT_LE(k_distance(iv.hi, s), kCantorTol);
    }
}

TEST(Cantor, CDistance) {
  const auto c = CantorSpec::fixed(0.25, 2);
  const double one_one[] = {1.0, 1.0};
  const double half[] = {0.5, 0.5};
  const double off[] = {-0.3, 0.0};
  EXPECT_EQ(c_distance(one_one, c), 0.0);
  EXPECT_NEAR(c_distance(half, c), 0.3535533905932738, 1e-12);
  EXPECT_NEAR(c_distance(off, c), 0.3, 1e-15);
  const double bad[] = {0.1};
  EXPECT_THROW(c_distance(bad, c), Error);
}

TEST(Cantor, CDistanceMatchesProductBruteForce) {
  const auto c = CantorSpec::fixed(0.25, 2);
  const int depth = 6;
  const auto corners = product_corners(c, depth);
  const double cell = std::pow(0.25, depth);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.1, 1.1);
  for (int t = 0; t < 200; ++t) {
    const double x[] = {U(rng), U(rng)};
    double best = 1e9;
    for (const Point& p : corners)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double q[] = {p[0] + a * cell, p[1] + b * cell};
          best = std::min(best, std::hypot(x[0] - q[0], x[1] - q[1]));
        }
    EXPECT_NEAR(c_distance(x, c), best, kCantorTol + std::sqrt(2.0) * cell);
  }
}

TEST(Cantor, Dimension) {
  EXPECT_NEAR(cantor_dim(CantorSpec::fixed(0.25), 2), 0.5, 1e-15);
  EXPECT_NEAR(cantor_dim(CantorSpec::fixed(0.125), 2), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(cantor_dim(CantorSpec::fixed(0.25), 3), 1.0, 1e-15);
  EXPECT_THROW(cantor_dim(fat_thin_cantor(4), 2), Error);
  EXPECT_GT(cantor_dim(CantorSpec::fixed(0.3), 2), cantor_dim(CantorSpec::fixed(0.2), 2));
  EXPECT_NEAR(cantor_dim(CantorSpec::fixed(0.3), 4), 3 * cantor_dim(CantorSpec::fixed(0.3), 2), 1e-14);
}

TEST(Cantor, SpecValidation) {
  EXPECT_THROW(CantorSpec::fixed(0.6), Error);
  EXPECT_THROW(CantorSpec::fixed(0.0), Error);
  EXPECT_THROW(CantorSpec::fixed(0.5), Error);
  try {
    CantorSpec::fixed(0.6);
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "lambda must be in (0, 1/2)");
  }
  EXPECT_THROW(CantorSpec::fixed(0.25, 1, 0), Error);
  EXPECT_THROW(CantorSpec::variable({0.3, 0.7}), Error);
}

TEST(Cantor, FatThin) {
  const auto f3 = fat_thin_cantor(3);
  EXPECT_NEAR(retained_measure(f3, 3), 0.4, 1e-15);
  EXPECT_TRUE(k_member(0.0, f3, 3));
  EXPECT_FALSE(k_member(0.5, f3, 3));
  const auto f12 = fat_thin_cantor(12);
  EXPECT_NEAR(box_dimension_estimate(f12, 12), 1.0, 0.1);
  EXPECT_THROW(fat_thin_cantor(0), Error);
  // Retained measure decreases with depth.
  for (int d = 1; d < 12; ++d) EXPECT_LT(retained_measure(f12, d + 1), retained_measure(f12, d));
}

TEST(Cantor, CornersAreLexicographic) {
  const auto c = CantorSpec::fixed(0.25, 2);
  const auto pts = product_corners(c, 2);
  ASSERT_EQ(pts.size(), 16u);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
}
