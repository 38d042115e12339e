#pragma once

#include "linkcert/geometry.hpp"

namespace linkcert {

using Vec2 = Eigen::Vector2d;

/// Exact sign of det[b - a, c - a]: +1 when a, b, c turn counterclockwise.
int orient2d(const Vec2 &a, const Vec2 &b, const Vec2 &c);

/// Exact sign of det[a - d; b - d; c - d].
int orient3d(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d);

enum class SegmentContact {
  None,       // closed segments are disjoint
  Proper,     // single crossing interior to both segments
  Degenerate  // touching at an endpoint, or collinear overlap
};

/// Exact classification of two closed 2D segments p0p1 and q0q1.
SegmentContact classify_segments_2d(const Vec2 &p0, const Vec2 &p1,
                                    const Vec2 &q0, const Vec2 &q1);

/// Exact closed-segment intersection test in 3D.
bool segments_intersect_3d(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0,
                           const Vec3 &q1);

} // namespace linkcert
