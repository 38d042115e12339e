#include "linkcert/braid.hpp"

#include "linkcert/predicates.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace linkcert {

using nlohmann::json;

namespace {

constexpr double kRigidTolerance = 1e-6;

std::vector<Vec3> boundary_points(const LoopGeometry &curve) {
  std::vector<Vec3> pts;
  pts.reserve(curve.segments.size() + 1);
  for (const auto &s : curve.segments)
    pts.push_back(s.start());
  if (!curve.segments.empty())
    pts.push_back(curve.segments.back().end());
  return pts;
}

double volume_slack(const EndVolume &v) {
  return 1e-9 * std::max(1.0, v.local.diameter());
}

void check_volume(const EndVolume &v, const char *name) {
  if (v.local.is_empty() || !v.local.min.allFinite() ||
      !v.local.max.allFinite())
    throw BraidError(std::string(name) + " end volume is empty or invalid");
  if (!(std::abs(v.outward.norm() - 1.0) < 1e-9))
    throw BraidError(std::string(name) + " outward axis must be a unit vector");
  const Mat3 gram = v.rotation.transpose() * v.rotation;
  if (!gram.isIdentity(1e-9) || !(v.rotation.determinant() > 0.0))
    throw BraidError(std::string(name) + " frame must be a proper rotation");
}

// Orients every curve left to right and checks that it touches each end
// volume only in an initial or final run of its points.
std::vector<LoopGeometry> orient_curves(const BraidModel &b,
                                        std::vector<bool> &reversed,
                                        const std::vector<bool> *forced) {
  std::vector<LoopGeometry> out;
  reversed.assign(b.curves.size(), false);
  const double sl = volume_slack(b.left), sr = volume_slack(b.right);
  for (std::size_t k = 0; k < b.curves.size(); ++k) {
    const auto &c = b.curves[k];
    if (c.closed)
      throw BraidError("braid curve " + std::to_string(k) + " is closed");
    if (c.segments.empty())
      throw BraidError("braid curve " + std::to_string(k) + " is empty");
    const Vec3 first = c.segments.front().start();
    const Vec3 last = c.segments.back().end();
    bool flip;
    if (forced) {
      flip = (*forced)[k];
    } else if (b.left.contains(first, sl) && b.right.contains(last, sr)) {
      flip = false;
    } else if (b.right.contains(first, sr) && b.left.contains(last, sl)) {
      flip = true;
    } else {
      throw BraidError("braid curve " + std::to_string(k) +
                       " has an endpoint outside its end volume");
    }
    reversed[k] = flip;
    out.push_back(flip ? reverse_loop(c) : c);
    const auto pts = boundary_points(out.back());
    if (!b.left.contains(pts.front(), sl) || !b.right.contains(pts.back(), sr))
      throw BraidError("braid curve " + std::to_string(k) +
                       " has an endpoint outside its end volume");
    std::size_t in_left = 0;
    while (in_left < pts.size() && b.left.contains(pts[in_left], sl))
      ++in_left;
    std::size_t in_right = 0;
    while (in_right < pts.size() &&
           b.right.contains(pts[pts.size() - 1 - in_right], sr))
      ++in_right;
    for (std::size_t p = in_left; p + in_right < pts.size(); ++p)
      if (b.left.contains(pts[p], sl) || b.right.contains(pts[p], sr))
        throw BraidError("braid curve " + std::to_string(k) +
                         " re-enters an end volume");
  }
  return out;
}

// Rail paths in local coordinates. ends[k] = (from, to) in world space.
std::vector<std::vector<Vec3>>
rail_paths(const EndVolume &v, const std::vector<std::pair<Vec3, Vec3>> &ends,
           const std::vector<LoopGeometry> &curves, const char *name) {
  const Vec3 &u = v.outward;
  const double slack = volume_slack(v);
  double base = -std::numeric_limits<double>::infinity();
  for (const auto &c : curves)
    for (const auto &p : boundary_points(c))
      if (v.contains(p, slack))
        base = std::max(base, v.to_local(p).dot(u));
  double top = -std::numeric_limits<double>::infinity();
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 x((corner & 1) ? v.local.max.x() : v.local.min.x(),
                 (corner & 2) ? v.local.max.y() : v.local.min.y(),
                 (corner & 4) ? v.local.max.z() : v.local.min.z());
    top = std::max(top, x.dot(u));
  }
  const double spacing = (top - base) / static_cast<double>(ends.size() + 1);
  if (!(spacing > slack))
    throw BraidError(std::string(name) +
                     " end volume has no room for connection rails");
  std::vector<std::vector<Vec3>> paths;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const double height = base + static_cast<double>(k + 1) * spacing;
    const Vec3 a = v.to_local(ends[k].first);
    const Vec3 b = v.to_local(ends[k].second);
    std::vector<Vec3> path{a, a + (height - a.dot(u)) * u,
                           b + (height - b.dot(u)) * u, b};
    for (const auto &p : path)
      if (!v.local.contains(p, slack))
        throw BraidError("connection offsets exceed the " + std::string(name) +
                         " end volume");
    paths.push_back(std::move(path));
  }
  return paths;
}

std::vector<Vec3> to_world(const EndVolume &v, const std::vector<Vec3> &local) {
  std::vector<Vec3> out;
  for (const auto &p : local)
    out.push_back(v.to_world(p));
  return out;
}

// Appends straight chords through the interior path points, from `from` to
// `to` (the exact curve endpoints).
void append_path(std::vector<CubicSegment> &segs, const Vec3 &from,
                 const std::vector<Vec3> &world_path, const Vec3 &to) {
  Vec3 prev = from;
  for (std::size_t k = 1; k + 1 < world_path.size(); ++k) {
    segs.push_back(CubicSegment::line(prev, world_path[k]));
    prev = world_path[k];
  }
  segs.push_back(CubicSegment::line(prev, to));
}

ClosedBraid assemble(const std::vector<LoopGeometry> &curves,
                     const ClosureTemplate &closure) {
  const std::size_t L = curves.size();
  std::vector<LoopGeometry> reversed;
  for (const auto &c : curves)
    reversed.push_back(reverse_loop(c));
  std::vector<LoopGeometry> loops;
  for (std::size_t k = 0; k < L; ++k) {
    const std::size_t n = (k + 1) % L;
    std::vector<CubicSegment> segs = curves[k].segments;
    append_path(segs, segs.back().end(),
                to_world(closure.right, closure.right_paths[k]),
                reversed[n].segments.front().start());
    segs.insert(segs.end(), reversed[n].segments.begin(),
                reversed[n].segments.end());
    append_path(segs, segs.back().end(),
                to_world(closure.left, closure.left_paths[k]),
                curves[k].segments.front().start());
    loops.push_back(make_cubic_loop(std::move(segs), true));
  }
  ClosedBraid out;
  out.model = make_model(std::move(loops));
  out.excluded = braid_excluded_pairs(L);
  out.closure = closure;
  if (!connections_disjoint(closure))
    throw BraidError("virtual connections intersect; braid endpoints are in "
                     "degenerate position");
  return out;
}

json vec_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json &j) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json volume_json(const EndVolume &v) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    rot.push_back(vec_json(v.rotation.row(r).transpose()));
  return {{"min", vec_json(v.local.min)},
          {"max", vec_json(v.local.max)},
          {"rotation", rot},
          {"translation", vec_json(v.translation)}};
}

EndVolume volume_from(const json &j, const Vec3 &axis) {
  EndVolume v;
  v.local.min = vec_from(j.at("min"));
  v.local.max = vec_from(j.at("max"));
  if (j.contains("rotation")) {
    const auto &rot = j.at("rotation");
    if (!rot.is_array() || rot.size() != 3)
      throw ParseError("rotation must be 3 rows");
    for (int r = 0; r < 3; ++r)
      v.rotation.row(r) = vec_from(rot[r]).transpose();
  }
  if (j.contains("translation"))
    v.translation = vec_from(j.at("translation"));
  v.outward = axis;
  return v;
}

json paths_json(const std::vector<std::vector<Vec3>> &paths) {
  json out = json::array();
  for (const auto &p : paths) {
    json path = json::array();
    for (const auto &v : p)
      path.push_back(vec_json(v));
    out.push_back(path);
  }
  return out;
}

std::vector<std::vector<Vec3>> paths_from(const json &j) {
  std::vector<std::vector<Vec3>> out;
  for (const auto &p : j) {
    out.emplace_back();
    for (const auto &v : p)
      out.back().push_back(vec_from(v));
  }
  return out;
}

LoopGeometry transform_loop(const LoopGeometry &loop, const Mat3 &R,
                            const Vec3 &t) {
  LoopGeometry out = loop;
  for (auto &p : out.control_points)
    p = R * p + t;
  for (auto &s : out.segments) {
    s.coeffs[0] = R * s.coeffs[0] + t;
    for (int k = 1; k < 4; ++k)
      s.coeffs[k] = R * s.coeffs[k];
  }
  return out;
}

} // namespace

LoopGeometry reverse_loop(const LoopGeometry &loop) {
  if (loop.kind == LoopKind::Polyline) {
    std::vector<Vec3> pts(loop.control_points.rbegin(),
                          loop.control_points.rend());
    if (loop.closed)  // keep the same starting vertex
      std::rotate(pts.rbegin(), pts.rbegin() + 1, pts.rend());
    return make_polyline_loop(pts, loop.closed);
  }
  if (loop.kind == LoopKind::CatmullRom) {
    std::vector<Vec3> pts(loop.control_points.rbegin(),
                          loop.control_points.rend());
    if (loop.closed)
      return make_catmull_rom_loop(pts);
    LoopGeometry out =
        make_cubic_loop(catmull_rom_open_to_cubics(pts), false);
    out.kind = LoopKind::CatmullRom;
    out.control_points = pts;
    return out;
  }
  std::vector<CubicSegment> segs;
  for (auto it = loop.segments.rbegin(); it != loop.segments.rend(); ++it) {
    const auto &a = it->coeffs;
    CubicSegment s;
    s.coeffs[0] = a[0] + a[1] + a[2] + a[3];
    s.coeffs[1] = -a[1] - 2.0 * a[2] - 3.0 * a[3];
    s.coeffs[2] = a[2] + 3.0 * a[3];
    s.coeffs[3] = -a[3];
    s.t_lo = 1.0 - it->t_hi;
    s.t_hi = 1.0 - it->t_lo;
    segs.push_back(s);
  }
  return make_cubic_loop(std::move(segs), loop.closed);
}

PairSet braid_excluded_pairs(std::size_t L) {
  PairSet out;
  for (std::size_t k = 0; k < L; ++k)
    out.insert(ordered_pair(static_cast<std::uint32_t>(k),
                            static_cast<std::uint32_t>((k + 1) % L)));
  return out;
}

ClosedBraid close_braid(const BraidModel &braid) {
  const std::size_t L = braid.curves.size();
  if (L < 4)
    throw BraidError("a braid needs at least 4 curves, got " +
                     std::to_string(L));
  check_volume(braid.left, "left");
  check_volume(braid.right, "right");
  ClosureTemplate closure;
  closure.left = braid.left;
  closure.right = braid.right;
  const auto curves = orient_curves(braid, closure.reversed, nullptr);

  std::vector<std::pair<Vec3, Vec3>> right_ends, left_ends;
  for (std::size_t k = 0; k < L; ++k) {
    const std::size_t n = (k + 1) % L;
    right_ends.emplace_back(curves[k].segments.back().end(),
                            curves[n].segments.back().end());
    left_ends.emplace_back(curves[n].segments.front().start(),
                           curves[k].segments.front().start());
  }
  closure.right_paths = rail_paths(braid.right, right_ends, curves, "right");
  closure.left_paths = rail_paths(braid.left, left_ends, curves, "left");
  return assemble(curves, closure);
}

ClosedBraid reclose_braid(const BraidModel &deformed,
                          const ClosureTemplate &closure) {
  const std::size_t L = deformed.curves.size();
  if (L != closure.right_paths.size() || L != closure.left_paths.size() ||
      L != closure.reversed.size())
    throw BraidError("curve count differs from the closure template");
  check_volume(deformed.left, "left");
  check_volume(deformed.right, "right");

  ClosureTemplate moved = closure;
  moved.left = deformed.left;
  moved.right = deformed.right;
  for (const auto &[tmpl, now, paths, name] :
       {std::tuple{&closure.left, &deformed.left, &moved.left_paths, "left"},
        std::tuple{&closure.right, &deformed.right, &moved.right_paths,
                   "right"}}) {
    const double scale = tmpl->local.diameter();
    if ((tmpl->local.extent() - now->local.extent()).norm() >
            kRigidTolerance * scale ||
        (tmpl->outward - now->outward).norm() > kRigidTolerance)
      throw BraidError(std::string(name) +
                       " end volume changed by a non-rigid transform");
    const Vec3 shift = now->local.min - tmpl->local.min;
    for (auto &path : *paths)
      for (auto &p : path)
        p += shift;
  }

  std::vector<bool> flags = closure.reversed;
  const auto curves = orient_curves(deformed, flags, &closure.reversed);
  // The curve ends are attached to the rigid blocks, so they must sit where
  // the carried template expects them.
  for (std::size_t k = 0; k < L; ++k) {
    const std::size_t n = (k + 1) % L;
    const auto check = [&](const EndVolume &v, const Vec3 &local_expected,
                           const Vec3 &actual) {
      if ((v.to_world(local_expected) - actual).norm() >
          kRigidTolerance * std::max(1.0, v.local.diameter()))
        throw BraidError("curve ends moved relative to their end volume");
    };
    check(moved.right, moved.right_paths[k].front(),
          curves[k].segments.back().end());
    check(moved.right, moved.right_paths[k].back(),
          curves[n].segments.back().end());
    check(moved.left, moved.left_paths[k].front(),
          curves[n].segments.front().start());
    check(moved.left, moved.left_paths[k].back(),
          curves[k].segments.front().start());
  }
  return assemble(curves, moved);
}

bool connections_disjoint(const ClosureTemplate &closure) {
  struct Path {
    std::vector<Vec3> pts;
    std::size_t loop;
  };
  std::vector<Path> paths;
  const std::size_t L = closure.right_paths.size();
  for (std::size_t k = 0; k < L; ++k) {
    paths.push_back({to_world(closure.right, closure.right_paths[k]), k});
    paths.push_back({to_world(closure.left, closure.left_paths[k]), k});
  }
  auto share_curve = [&](std::size_t a, std::size_t b) {
    return a == b || (a + 1) % L == b || (b + 1) % L == a;
  };
  for (std::size_t x = 0; x < paths.size(); ++x) {
    for (std::size_t y = x + 1; y < paths.size(); ++y) {
      if (share_curve(paths[x].loop, paths[y].loop))
        continue;
      const auto &p = paths[x].pts;
      const auto &q = paths[y].pts;
      for (std::size_t i = 0; i + 1 < p.size(); ++i)
        for (std::size_t j = 0; j + 1 < q.size(); ++j)
          if (Aabb::of_points(p[i], p[i + 1])
                  .overlaps(Aabb::of_points(q[j], q[j + 1])) &&
              segments_intersect_3d(p[i], p[i + 1], q[j], q[j + 1]))
            return false;
    }
  }
  return true;
}

BraidModel parse_braid_json(const std::string &text) {
  const CurveModel model = parse_json_curves(text, true);
  BraidModel b;
  b.curves = model.loops;
  try {
    const json doc = json::parse(text);
    const auto &bj = doc.at("braid");
    const auto &axes = bj.at("axes");
    if (!axes.is_array() || axes.size() != 2)
      throw ParseError("braid axes must be [left, right]");
    b.left = volume_from(bj.at("left_volume"), vec_from(axes[0]).normalized());
    b.right =
        volume_from(bj.at("right_volume"), vec_from(axes[1]).normalized());
  } catch (const json::exception &e) {
    throw ParseError(std::string("braid: ") + e.what());
  }
  return b;
}

std::string braid_to_json(const BraidModel &braid) {
  CurveModel m;
  m.loops = braid.curves;
  json doc = json::parse(to_json_curves(m));
  doc["braid"] = {{"left_volume", volume_json(braid.left)},
                  {"right_volume", volume_json(braid.right)},
                  {"axes", json::array({vec_json(braid.left.outward),
                                        vec_json(braid.right.outward)})}};
  return doc.dump();
}

std::string closure_to_json(const ClosureTemplate &c) {
  json doc;
  doc["left"] = volume_json(c.left);
  doc["right"] = volume_json(c.right);
  doc["axes"] =
      json::array({vec_json(c.left.outward), vec_json(c.right.outward)});
  doc["left_paths"] = paths_json(c.left_paths);
  doc["right_paths"] = paths_json(c.right_paths);
  json rev = json::array();
  for (bool r : c.reversed)
    rev.push_back(r);
  doc["reversed"] = rev;
  return doc.dump();
}

ClosureTemplate parse_closure(const std::string &text) {
  ClosureTemplate c;
  try {
    const json doc = json::parse(text);
    const auto &axes = doc.at("axes");
    c.left = volume_from(doc.at("left"), vec_from(axes.at(0)));
    c.right = volume_from(doc.at("right"), vec_from(axes.at(1)));
    c.left_paths = paths_from(doc.at("left_paths"));
    c.right_paths = paths_from(doc.at("right_paths"));
    for (const auto &r : doc.at("reversed"))
      c.reversed.push_back(r.get<bool>());
  } catch (const json::exception &e) {
    throw ParseError(std::string("closure: ") + e.what());
  }
  return c;
}

BraidModel synthetic_braid(int L,
                           const std::vector<std::pair<int, int>> &pull_throughs,
                           int samples) {
  constexpr double kLength = 10.0;
  constexpr double kWrapRadius = 0.2;
  auto position = [L](int i) {
    const double a = 2.0 * M_PI * i / L;
    return Vec3(0.0, std::cos(a), std::sin(a));
  };
  BraidModel b;
  for (int i = 0; i < L; ++i) {
    const Vec3 p = position(i);
    std::vector<Vec3> pts;
    int wrap_around = -1;
    for (const auto &[a, c] : pull_throughs)
      if (a == i)
        wrap_around = c;
    for (int s = 0; s <= samples; ++s) {
      const double x = kLength * s / samples;
      if (wrap_around >= 0 && x > 0.38 * kLength && x < 0.62 * kLength)
        continue;
      if (wrap_around >= 0 && std::abs(x - 0.62 * kLength) < 1e-12)
        continue;
      pts.push_back(p + Vec3(x, 0, 0));
      if (wrap_around >= 0 && x <= 0.38 * kLength &&
          kLength * (s + 1) / samples > 0.38 * kLength) {
        // Detour: cross over to strand `wrap_around`, circle it once, come
        // back.
        const Vec3 q = position(wrap_around);
        const Vec3 dir = (p - q).normalized();
        const Vec3 side = Vec3::UnitX().cross(dir);
        constexpr int kTurn = 24;
        const double x0 = 0.42 * kLength, x1 = 0.58 * kLength;
        for (int t = 0; t <= kTurn; ++t) {
          const double ang = 2.0 * M_PI * t / kTurn;
          const double xx = x0 + (x1 - x0) * t / kTurn;
          pts.push_back(q + kWrapRadius * (std::cos(ang) * dir +
                                           std::sin(ang) * side) +
                        Vec3(xx, 0, 0));
        }
        pts.push_back(p + Vec3(0.62 * kLength, 0, 0));
      }
    }
    b.curves.push_back(make_polyline_loop(pts, false));
  }
  b.left.local = Aabb::of_points(Vec3(-1.0, -2.0, -2.0), Vec3(0.0, 2.0, 2.0));
  b.left.outward = -Vec3::UnitX();
  b.right.local =
      Aabb::of_points(Vec3(kLength, -2.0, -2.0), Vec3(kLength + 1.0, 2.0, 2.0));
  b.right.outward = Vec3::UnitX();
  return b;
}

BraidModel transform_braid(const BraidModel &braid, const Mat3 &R,
                           const Vec3 &t) {
  BraidModel out = braid;
  for (auto &c : out.curves)
    c = transform_loop(c, R, t);
  for (EndVolume *v : {&out.left, &out.right}) {
    v->rotation = R * v->rotation;
    v->translation = R * v->translation + t;
  }
  return out;
}

} // namespace linkcert
