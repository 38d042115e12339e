#include "linkcert/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace linkcert {

CubicSegment CubicSegment::line(const Vec3 &a, const Vec3 &b) {
  CubicSegment seg;
  seg.coeffs[0] = a;
  seg.coeffs[1] = b - a;
  return seg;
}

bool CubicSegment::is_finite() const {
  for (const auto &c : coeffs)
    if (!c.allFinite())
      return false;
  return std::isfinite(t_lo) && std::isfinite(t_hi);
}

namespace {

// Real roots of A t^2 + B t + C in the open interval (lo, hi).
int derivative_roots(double A, double B, double C, double lo, double hi,
                     double roots[2]) {
  int n = 0;
  auto keep = [&](double t) {
    if (t > lo && t < hi)
      roots[n++] = t;
  };
  if (A == 0.0) {
    if (B != 0.0)
      keep(-C / B);
    return n;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0)
    return n;
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  keep(q / A);
  if (q != 0.0)
    keep(C / q);
  return n;
}

} // namespace

Aabb cubic_extent(const CubicSegment &seg) {
  Aabb box = Aabb::of_points(seg.start(), seg.end());
  if (seg.is_straight())
    return box;
  const auto &a = seg.coeffs;
  for (int axis = 0; axis < 3; ++axis) {
    double roots[2];
    const int n = derivative_roots(3.0 * a[3][axis], 2.0 * a[2][axis],
                                   a[1][axis], seg.t_lo, seg.t_hi, roots);
    for (int r = 0; r < n; ++r) {
      const double v = seg.eval(roots[r])[axis];
      box.min[axis] = std::min(box.min[axis], v);
      box.max[axis] = std::max(box.max[axis], v);
    }
  }
  return box;
}

Aabb tight_aabb(const CubicSegment &seg) {
  Aabb box = cubic_extent(seg);
  if (seg.is_straight())
    return box;
  // Horner evaluation is off by a few ulps of the coefficient scale; pad
  // so interior curve points cannot poke outside.
  const auto &a = seg.coeffs;
  for (int axis = 0; axis < 3; ++axis) {
    const double scale = std::abs(a[0][axis]) + std::abs(a[1][axis]) +
                         std::abs(a[2][axis]) + std::abs(a[3][axis]);
    const double pad = 8.0 * kMachineEpsilon * scale;
    box.min[axis] -= pad;
    box.max[axis] += pad;
  }
  return box;
}

std::pair<CubicSegment, CubicSegment> split_cubic(const CubicSegment &seg) {
  const double mid = 0.5 * (seg.t_lo + seg.t_hi);
  CubicSegment left = seg;
  CubicSegment right = seg;
  left.t_hi = mid;
  right.t_lo = mid;
  return {left, right};
}

double max_parametric_speed(const CubicSegment &seg) {
  const double t = std::max(std::abs(seg.t_lo), std::abs(seg.t_hi));
  return seg.coeffs[1].norm() + 2.0 * t * seg.coeffs[2].norm() +
         3.0 * t * t * seg.coeffs[3].norm();
}

double segment_distance(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0,
                        const Vec3 &q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a == 0.0 && e == 0.0)
    return r.norm();
  if (a == 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e == 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 0.0)
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

} // namespace linkcert
