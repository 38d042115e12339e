#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <limits>
#include <utility>

namespace linkcert {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kMachineEpsilon = std::numeric_limits<double>::epsilon();

/// Axis-aligned bounding box. All overlap queries are closed-interval, so
/// touching boxes overlap.
struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  static Aabb of_points(const Vec3 &a, const Vec3 &b) {
    Aabb box;
    box.min = a.cwiseMin(b);
    box.max = a.cwiseMax(b);
    return box;
  }

  bool is_empty() const { return (min.array() > max.array()).any(); }

  void expand(const Vec3 &p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb &other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  /// Length of the box diagonal.
  double diameter() const { return extent().norm(); }
  /// Half the diagonal: the radius of the circumscribed sphere about center().
  double radius() const { return 0.5 * diameter(); }

  bool overlaps(const Aabb &o) const {
    return (min.array() <= o.max.array()).all() &&
           (o.min.array() <= max.array()).all();
  }
  bool contains(const Vec3 &p, double slack = 0.0) const {
    return (p.array() >= min.array() - slack).all() &&
           (p.array() <= max.array() + slack).all();
  }
  bool contains(const Aabb &o) const {
    return (o.min.array() >= min.array()).all() &&
           (o.max.array() <= max.array()).all();
  }
};

/// Cubic curve piece in monomial form, p(t) = a0 + a1 t + a2 t^2 + a3 t^3,
/// restricted to the parameter window [t_lo, t_hi] within [0, 1]. Splitting
/// keeps the coefficients and only narrows the window.
struct CubicSegment {
  std::array<Vec3, 4> coeffs{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                             Vec3::Zero()};
  double t_lo = 0.0;
  double t_hi = 1.0;

  /// Straight segment a -> b over t in [0, 1].
  static CubicSegment line(const Vec3 &a, const Vec3 &b);

  Vec3 eval(double t) const {
    return coeffs[0] + t * (coeffs[1] + t * (coeffs[2] + t * coeffs[3]));
  }
  Vec3 derivative(double t) const {
    return coeffs[1] + t * (2.0 * coeffs[2] + t * (3.0 * coeffs[3]));
  }
  Vec3 start() const { return eval(t_lo); }
  Vec3 end() const { return eval(t_hi); }
  bool is_straight() const {
    return coeffs[2].isZero(0.0) && coeffs[3].isZero(0.0);
  }
  bool is_finite() const;
};

/// Box of the evaluated per-axis extrema over the window: endpoints plus
/// the real roots of the derivative quadratic that fall inside it.
Aabb cubic_extent(const CubicSegment &seg);

/// cubic_extent padded by the evaluation rounding bound, so it encloses
/// every point of the curve piece.
Aabb tight_aabb(const CubicSegment &seg);

/// Halves the parameter window. Both children keep the parent's coefficients.
std::pair<CubicSegment, CubicSegment> split_cubic(const CubicSegment &seg);

/// Upper bound on |p'(t)| over the segment window, from the triangle
/// inequality on the derivative's monomial terms.
double max_parametric_speed(const CubicSegment &seg);

/// Minimum distance between two 3D line segments.
double segment_distance(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0,
                        const Vec3 &q1);

} // namespace linkcert
