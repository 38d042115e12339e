#pragma once

#include "linkcert/model.hpp"
#include "linkcert/pls.hpp"

#include <string>
#include <utility>
#include <vector>

namespace linkcert {

/// Rigid end volume: a box in its own frame, placed in the world by
/// x_world = rotation * x_local + translation. `outward` is a unit vector in
/// the local frame pointing away from the braid.
struct EndVolume {
  Aabb local;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 outward = Vec3::UnitX();

  Vec3 to_world(const Vec3 &p) const { return rotation * p + translation; }
  Vec3 to_local(const Vec3 &p) const {
    return rotation.transpose() * (p - translation);
  }
  bool contains(const Vec3 &world, double slack = 0.0) const {
    return local.contains(to_local(world), slack);
  }
};

/// Open curves pinned between two rigid ends.
struct BraidModel {
  std::vector<LoopGeometry> curves;
  EndVolume left;
  EndVolume right;
};

/// Virtual connection paths in local coordinates of their end volume.
/// right_paths[k] joins the right ends of curves k and k+1 (cyclically);
/// left_paths[k] joins the left end of curve k+1 back to curve k.
struct ClosureTemplate {
  EndVolume left;
  EndVolume right;
  std::vector<std::vector<Vec3>> left_paths;
  std::vector<std::vector<Vec3>> right_paths;
  std::vector<bool> reversed;  // input curves flipped to run left to right
};

struct ClosedBraid {
  CurveModel model;
  PairSet excluded;  // loop pairs sharing a curve
  ClosureTemplate closure;
};

ClosedBraid close_braid(const BraidModel &braid);

/// Re-closes a deformed braid with the connection paths of `closure`,
/// carried along with the (rigidly moved) end volumes.
ClosedBraid reclose_braid(const BraidModel &deformed,
                          const ClosureTemplate &closure);

/// Loop pairs sharing a curve: (k, k+1) and (0, L-1).
PairSet braid_excluded_pairs(std::size_t L);

/// Indices of the two input curves used by loop k.
inline std::pair<std::size_t, std::size_t> braid_loop_curves(std::size_t k,
                                                             std::size_t L) {
  return {k, (k + 1) % L};
}

/// Exact test that no two connection chords of loops sharing no curve
/// intersect. World coordinates.
bool connections_disjoint(const ClosureTemplate &closure);

LoopGeometry reverse_loop(const LoopGeometry &loop);

BraidModel parse_braid_json(const std::string &text);
std::string braid_to_json(const BraidModel &braid);
std::string closure_to_json(const ClosureTemplate &closure);
ClosureTemplate parse_closure(const std::string &text);

/// Straight strands along x between end blocks, endpoints on a circle of
/// radius 1 in the yz plane. Each (i, j) in `pull_throughs` wraps strand i
/// once around strand j midway along the braid.
BraidModel synthetic_braid(int L,
                           const std::vector<std::pair<int, int>> &pull_throughs = {},
                           int samples = 40);

/// Applies x -> R x + t to every curve point and both end volumes.
BraidModel transform_braid(const BraidModel &braid, const Mat3 &R,
                           const Vec3 &t);

} // namespace linkcert
