#include "linkcert/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>

namespace linkcert {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Floating-point filter constants. Using the full machine epsilon instead of
// the half-ulp unit roundoff doubles the bounds, which only makes the filter
// more conservative.
constexpr double kEps = kMachineEpsilon;
constexpr double kCcwBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dBound = (7.0 + 56.0 * kEps) * kEps;

template <typename T> int sign_of(const T &v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int orient2d_exact(const Vec2 &a, const Vec2 &b, const Vec2 &c) {
  const Rational acx = Rational(a.x()) - Rational(c.x());
  const Rational bcx = Rational(b.x()) - Rational(c.x());
  const Rational acy = Rational(a.y()) - Rational(c.y());
  const Rational bcy = Rational(b.y()) - Rational(c.y());
  return sign_of(Rational(acx * bcy - acy * bcx));
}

int orient3d_exact(const Vec3 &a, const Vec3 &b, const Vec3 &c,
                   const Vec3 &d) {
  Rational m[3][3];
  const Vec3 *rows[3] = {&a, &b, &c};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k)
      m[r][k] = Rational((*rows[r])[k]) - Rational(d[k]);
  const Rational det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) +
                       m[1][0] * (m[2][1] * m[0][2] - m[2][2] * m[0][1]) +
                       m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
  return sign_of(det);
}

// For collinear segments, overlap of both coordinate ranges is exact.
bool collinear_overlap(const Vec2 &p0, const Vec2 &p1, const Vec2 &q0,
                       const Vec2 &q1) {
  for (int k = 0; k < 2; ++k) {
    const double plo = std::min(p0[k], p1[k]);
    const double phi = std::max(p0[k], p1[k]);
    const double qlo = std::min(q0[k], q1[k]);
    const double qhi = std::max(q0[k], q1[k]);
    if (phi < qlo || qhi < plo)
      return false;
  }
  return true;
}

} // namespace

int orient2d(const Vec2 &a, const Vec2 &b, const Vec2 &c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  const double errbound = kCcwBound * (std::abs(detleft) + std::abs(detright));
  if (det > errbound || -det > errbound)
    return sign_of(det);
  return orient2d_exact(a, b, c);
}

int orient3d(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
  const Vec3 ad = a - d;
  const Vec3 bd = b - d;
  const Vec3 cd = c - d;
  const double bdxcdy = bd.x() * cd.y(), cdxbdy = cd.x() * bd.y();
  const double cdxady = cd.x() * ad.y(), adxcdy = ad.x() * cd.y();
  const double adxbdy = ad.x() * bd.y(), bdxady = bd.x() * ad.y();
  const double det = ad.z() * (bdxcdy - cdxbdy) + bd.z() * (cdxady - adxcdy) +
                     cd.z() * (adxbdy - bdxady);
  const double permanent =
      (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(ad.z()) +
      (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bd.z()) +
      (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cd.z());
  const double errbound = kO3dBound * permanent;
  if (det > errbound || -det > errbound)
    return sign_of(det);
  return orient3d_exact(a, b, c, d);
}

SegmentContact classify_segments_2d(const Vec2 &p0, const Vec2 &p1,
                                    const Vec2 &q0, const Vec2 &q1) {
  const int o1 = orient2d(p0, p1, q0);
  const int o2 = orient2d(p0, p1, q1);
  if (o1 * o2 > 0)
    return SegmentContact::None;
  const int o3 = orient2d(q0, q1, p0);
  const int o4 = orient2d(q0, q1, p1);
  if (o3 * o4 > 0)
    return SegmentContact::None;
  if (o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
    return SegmentContact::Proper;
  if (o1 == 0 && o2 == 0)
    return collinear_overlap(p0, p1, q0, q1) ? SegmentContact::Degenerate
                                             : SegmentContact::None;
  // One zero with the segments not separated: an endpoint lies on the other
  // segment or two endpoints coincide.
  return SegmentContact::Degenerate;
}

bool segments_intersect_3d(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0,
                           const Vec3 &q1) {
  if (orient3d(p0, p1, q0, q1) != 0)
    return false;
  // Coplanar: at least one coordinate projection is injective on the common
  // plane, and every projection of intersecting segments intersects.
  static constexpr int kDrop[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  for (const auto &axes : kDrop) {
    auto proj = [&](const Vec3 &v) { return Vec2(v[axes[0]], v[axes[1]]); };
    if (classify_segments_2d(proj(p0), proj(p1), proj(q0), proj(q1)) ==
        SegmentContact::None)
      return false;
  }
  return true;
}

} // namespace linkcert
