#pragma once

#include "linkcert/model.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <vector>

namespace testing_helpers {

using linkcert::Mat3;
using linkcert::PolylineLoop;
using linkcert::Vec3;

inline PolylineLoop circle(int n, double radius = 1.0,
                           const Vec3 &center = Vec3::Zero(),
                           const Mat3 &frame = Mat3::Identity()) {
  PolylineLoop l;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    l.vertices.push_back(center +
                         frame * Vec3(radius * std::cos(t),
                                      radius * std::sin(t), 0.0));
  }
  return l;
}

/// Circles in the xy plane at the origin and in the xz plane at (1,0,0).
inline std::pair<PolylineLoop, PolylineLoop> hopf(int n) {
  Mat3 xz;
  xz << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  return {circle(n), circle(n, 1.0, Vec3(1, 0, 0), xz)};
}

inline Mat3 random_rotation(std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Gauss double integral by the midpoint rule with `sub` pieces per segment.
inline double gauss_quadrature(const std::vector<std::pair<Vec3, Vec3>> &a,
                               const std::vector<std::pair<Vec3, Vec3>> &b,
                               int sub) {
  double sum = 0.0;
  for (const auto &[a0, a1] : a) {
    const Vec3 da = (a1 - a0) / sub;
    for (int s = 0; s < sub; ++s) {
      const Vec3 pa = a0 + (s + 0.5) * da;
      for (const auto &[b0, b1] : b) {
        const Vec3 db = (b1 - b0) / sub;
        for (int t = 0; t < sub; ++t) {
          const Vec3 pb = b0 + (t + 0.5) * db;
          const Vec3 r = pa - pb;
          sum += r.dot(da.cross(db)) / std::pow(r.norm(), 3);
        }
      }
    }
  }
  return sum / (4.0 * M_PI);
}

inline std::vector<std::pair<Vec3, Vec3>> edges(const PolylineLoop &l) {
  std::vector<std::pair<Vec3, Vec3>> out;
  for (std::size_t i = 0; i < l.size(); ++i)
    out.emplace_back(l.vertex(i), l.vertex(i + 1));
  return out;
}

inline PolylineLoop transformed(const PolylineLoop &l, const Mat3 &R,
                                const Vec3 &t) {
  PolylineLoop out;
  for (const auto &v : l.vertices)
    out.vertices.push_back(R * v + t);
  return out;
}

inline PolylineLoop midpoint_refined(const PolylineLoop &l) {
  PolylineLoop out;
  for (std::size_t i = 0; i < l.size(); ++i) {
    out.vertices.push_back(l.vertex(i));
    out.vertices.push_back(0.5 * (l.vertex(i) + l.vertex(i + 1)));
  }
  return out;
}

/// Rigidly moves one loop of a model; `xi` is recomputed.
inline linkcert::CurveModel with_loop_moved(const linkcert::CurveModel &model,
                                            std::size_t index, const Vec3 &shift) {
  auto loops = model.loops;
  auto &l = loops[index];
  for (auto &s : l.segments)
    s.coeffs[0] += shift;
  for (auto &c : l.control_points)
    c += shift;
  return linkcert::make_model(std::move(loops));
}

} // namespace testing_helpers
