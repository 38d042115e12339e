#include "linkcert/geometry.hpp"
#include "linkcert/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace linkcert;

namespace {

CubicSegment random_cubic(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  CubicSegment seg;
  for (auto &c : seg.coeffs)
    c = Vec3(u(rng), u(rng), u(rng));
  std::uniform_real_distribution<double> t(0.0, 1.0);
  double a = t(rng), b = t(rng);
  if (a > b)
    std::swap(a, b);
  if (b - a < 1e-3)
    b = std::min(1.0, a + 0.1);
  seg.t_lo = a;
  seg.t_hi = b;
  return seg;
}

} // namespace

TEST(TightAabb, StraightSegmentIsEndpointBox) {
  const auto seg = CubicSegment::line(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const Aabb box = tight_aabb(seg);
  EXPECT_EQ(box.min, Vec3(0, 0, 0));
  EXPECT_EQ(box.max, Vec3(1, 1, 1));
}

TEST(TightAabb, ParabolaVertex) {
  CubicSegment seg;
  seg.coeffs[1] = Vec3(1, 1, 0);
  seg.coeffs[2] = Vec3(0, -1, 0);
  const Aabb box = tight_aabb(seg);
  EXPECT_NEAR(box.max.y(), 0.25, 1e-14);
  EXPECT_NEAR(box.min.y(), 0.0, 1e-14);
  EXPECT_NEAR(box.max.x(), 1.0, 1e-14);
}

TEST(TightAabb, ContainsDenseSamplesOfRandomCubics) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto seg = random_cubic(rng);
    const Aabb box = tight_aabb(seg);
    double xi = 0.0;
    for (const auto &c : seg.coeffs)
      xi += c.cwiseAbs().sum() / 12.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 1000.0;
      ASSERT_TRUE(box.contains(seg.eval(t), 1e-12 * xi)) << trial << " " << k;
    }
  }
}

TEST(TightAabb, IsTightAtSampledExtremes) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto seg = random_cubic(rng);
    const Aabb box = tight_aabb(seg);
    Aabb sampled;
    for (int k = 0; k <= 20000; ++k)
      sampled.expand(seg.eval(seg.t_lo + (seg.t_hi - seg.t_lo) * k / 20000.0));
    EXPECT_LT((box.min - sampled.min).norm(), 1e-6);
    EXPECT_LT((box.max - sampled.max).norm(), 1e-6);
  }
}

TEST(SplitCubic, HalvesDomain) {
  const auto seg = CubicSegment::line(Vec3(0, 0, 0), Vec3(1, 0, 0));
  const auto [a, b] = split_cubic(seg);
  EXPECT_EQ(a.t_lo, 0.0);
  EXPECT_EQ(a.t_hi, 0.5);
  EXPECT_EQ(b.t_lo, 0.5);
  EXPECT_EQ(b.t_hi, 1.0);
  EXPECT_EQ(a.coeffs, seg.coeffs);
}

TEST(SplitCubic, FortyFiveSplitsReachDoublePrecisionWidth) {
  CubicSegment seg;
  seg.coeffs[1] = Vec3(1, 0, 0);
  for (int k = 0; k < 45; ++k)
    seg = split_cubic(seg).first;
  EXPECT_EQ(seg.t_hi - seg.t_lo, std::ldexp(1.0, -45));
}

TEST(SplitCubic, ChildrenEvaluateLikeParentAndCoverIt) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seg = random_cubic(rng);
    const auto [a, b] = split_cubic(seg);
    const Aabb ba = tight_aabb(a), bb = tight_aabb(b);
    for (int k = 0; k <= 500; ++k) {
      const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 500.0;
      const auto &owner = t <= a.t_hi ? a : b;
      EXPECT_EQ(owner.eval(t), seg.eval(t));
      EXPECT_TRUE(ba.contains(seg.eval(t), 1e-12) ||
                  bb.contains(seg.eval(t), 1e-12));
    }
  }
}

TEST(SegmentDistance, MatchesDenseSampling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p0(u(rng), u(rng), u(rng)), p1(u(rng), u(rng), u(rng));
    const Vec3 q0(u(rng), u(rng), u(rng)), q1(u(rng), u(rng), u(rng));
    double best = 1e300;
    for (int i = 0; i <= 400; ++i)
      for (int j = 0; j <= 400; ++j)
        best = std::min(best, ((p0 + (p1 - p0) * (i / 400.0)) -
                               (q0 + (q1 - q0) * (j / 400.0)))
                                  .norm());
    const double d = segment_distance(p0, p1, q0, q1);
    EXPECT_LE(d, best + 1e-12);
    EXPECT_GT(d, best - 1e-2);
  }
}

TEST(MaxParametricSpeed, BoundsSampledSpeed) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seg = random_cubic(rng);
    const double M = max_parametric_speed(seg);
    for (int k = 0; k <= 200; ++k) {
      const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 200.0;
      EXPECT_LE(seg.derivative(t).norm(), M * (1 + 1e-12));
    }
  }
}
