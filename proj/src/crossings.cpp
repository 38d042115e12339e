#include "linkcert/bvh.hpp"
#include "linkcert/kernels.hpp"
#include "linkcert/predicates.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>

namespace linkcert {

namespace {

constexpr double kHalfPi = 0.5 * kPi;

// Midpoint of the widest gap between sorted angles on a circle of the given
// period.
double widest_gap_midpoint(std::vector<double> &angles, double period) {
  if (angles.empty())
    return 0.0;
  std::sort(angles.begin(), angles.end());
  double best_gap = angles.front() + period - angles.back();
  double best_mid = angles.back() + 0.5 * best_gap;
  for (std::size_t k = 1; k < angles.size(); ++k) {
    const double gap = angles[k] - angles[k - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best_mid = angles[k - 1] + 0.5 * gap;
    }
  }
  return std::fmod(best_mid, period);
}

double wrap(double angle, double period) {
  double r = std::fmod(angle, period);
  return r < 0.0 ? r + period : r;
}

Mat3 random_rotation(std::mt19937_64 &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  return q.toRotationMatrix();
}

Mat3 rotation_z(double phi) {
  return Eigen::AngleAxisd(phi, Vec3::UnitZ()).toRotationMatrix();
}

// Rotation about y that maps the xz-plane angle theta to theta + phi, with
// angles measured as atan2(z, x).
Mat3 rotation_xz(double phi) {
  Mat3 m = Mat3::Identity();
  const double c = std::cos(phi), s = std::sin(phi);
  m(0, 0) = c;
  m(0, 2) = -s;
  m(2, 0) = s;
  m(2, 2) = c;
  return m;
}

// Random frame, then turned about z so no projected segment is near
// horizontal or vertical, then about y so none is near the view direction.
Mat3 choose_frame(const PolylineLoop &loop1, const PolylineLoop &loop2,
                  std::mt19937_64 &rng) {
  Mat3 frame = random_rotation(rng);
  const std::size_t total = loop1.size() + loop2.size();
  std::vector<Vec3> dirs;
  dirs.reserve(total);
  for (const auto *loop : {&loop1, &loop2})
    for (std::size_t i = 0; i < loop->size(); ++i)
      dirs.push_back(frame * (loop->vertex(i + 1) - loop->vertices[i]));

  std::vector<double> angles;
  angles.reserve(total);
  for (const auto &d : dirs)
    angles.push_back(wrap(std::atan2(d.y(), d.x()), kHalfPi));
  const Mat3 rz = rotation_z(-widest_gap_midpoint(angles, kHalfPi));

  angles.clear();
  for (auto &d : dirs) {
    d = rz * d;
    angles.push_back(wrap(std::atan2(d.z(), d.x()), kPi));
  }
  const Mat3 ry = rotation_xz(kHalfPi - widest_gap_midpoint(angles, kPi));
  return ry * rz * frame;
}

enum class FrameOutcome { Ok, Degenerate };

struct Projected {
  std::vector<Vec3> pts;
  std::vector<Aabb> boxes;  // z flattened
};

Projected project(const PolylineLoop &loop, const Mat3 &frame) {
  Projected out;
  out.pts.reserve(loop.size());
  for (const auto &v : loop.vertices)
    out.pts.push_back(frame * v);
  const std::size_t n = out.pts.size();
  out.boxes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Aabb b = Aabb::of_points(out.pts[i], out.pts[(i + 1) % n]);
    b.min.z() = 0.0;
    b.max.z() = 0.0;
    out.boxes.push_back(b);
  }
  return out;
}

// Signed crossing count (each crossing contributes +-1, i.e. twice its
// linking weight). Returns Degenerate when the projection is not regular.
FrameOutcome signed_crossings(const Projected &one, const Projected &two,
                              bool use_bvh, std::int64_t &total) {
  total = 0;
  const std::size_t n1 = one.pts.size();
  const std::size_t n2 = two.pts.size();
  auto visit = [&](std::size_t q, std::size_t p) -> bool {
    const Vec3 &q0 = one.pts[q];
    const Vec3 &q1 = one.pts[(q + 1) % n1];
    const Vec3 &p0 = two.pts[p];
    const Vec3 &p1 = two.pts[(p + 1) % n2];
    const auto contact = classify_segments_2d(
        p0.head<2>(), p1.head<2>(), q0.head<2>(), q1.head<2>());
    if (contact == SegmentContact::None)
      return true;
    if (contact == SegmentContact::Degenerate)
      return false;
    // Sign of (q0 - p0) . ((p1 - p0) x (q1 - q0)); zero means the segments
    // meet in space or share a height at the crossing.
    const int t = orient3d(q0, p1, q1, p0);
    if (t == 0)
      return false;
    total -= t;
    return true;
  };

  if (!use_bvh) {
    for (std::size_t q = 0; q < n1; ++q)
      for (std::size_t p = 0; p < n2; ++p)
        if (one.boxes[q].overlaps(two.boxes[p]) && !visit(q, p))
          return FrameOutcome::Degenerate;
    return FrameOutcome::Ok;
  }
  const BvhTree tree(one.boxes);
  bool ok = true;
  for (std::size_t p = 0; p < n2 && ok; ++p)
    for_each_overlap(tree, one.boxes, two.boxes[p], [&](std::uint32_t q) {
      if (ok && !visit(q, p))
        ok = false;
    });
  return ok ? FrameOutcome::Ok : FrameOutcome::Degenerate;
}

} // namespace

CrossingResult count_crossings(const PolylineLoop &loop1,
                               const PolylineLoop &loop2,
                               const CrossingParams &params,
                               std::uint64_t stream) {
  CrossingResult result;
  const bool use_bvh =
      (loop1.size() + loop2.size()) / 2 > params.bvh_threshold;
  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed),
                      static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    const Mat3 frame = choose_frame(loop1, loop2, rng);
    const Projected one = project(loop1, frame);
    const Projected two = project(loop2, frame);
    std::int64_t total = 0;
    if (signed_crossings(one, two, use_bvh, total) == FrameOutcome::Ok &&
        total % 2 == 0) {
      result.value = total / 2;
      result.signed_half_crossings = total;
      result.retries = attempt;
      return result;
    }
  }
  throw KernelError("crossing counting found no regular projection after " +
                    std::to_string(params.max_retries) + " frames");
}

std::int64_t link_count_crossings(const PolylineLoop &loop1,
                                  const PolylineLoop &loop2,
                                  const CrossingParams &params,
                                  std::uint64_t stream) {
  return count_crossings(loop1, loop2, params, stream).value;
}

} // namespace linkcert
