#pragma once

#include "linkcert/certify.hpp"
#include "linkcert/model.hpp"

#include <cstdint>
#include <string>

namespace linkcert {

enum class ScenarioKind {
  Hopf,
  UnlinkedCircles,
  TorusLink,
  DoubleHelixRibbon,
  SquareLinkGrid,
  Woundball,
  PerturbedRandomLink
};

/// Parameters for all scenario kinds; each kind reads only its own fields.
/// `n` is the total segment (or control point) count of the model, split
/// evenly across loops; 0 selects a per-kind default.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Hopf;
  std::size_t n = 0;
  int T = 1;           // torus: toroidal traversals of the core circle
  int P = 1;           // torus: poloidal windings of the second loop
  int lambda = 1;      // ribbon twists
  int L = 10;          // grid size
  int nu = 10;         // woundball pole crossings
  int count = 2;       // unlinked circles
  std::uint64_t seed = 0;
  double jitter = 0.2;  // perturbation, fraction of the tube radius
  bool catmull_rom = false;
};

struct Scenario {
  CurveModel model;
  LinkMatrix expected;
};

Scenario generate(const ScenarioSpec &spec);

std::string scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(const std::string &name);

/// Tube radius of the torus-link family (distance between its two loops).
inline constexpr double kTorusTubeRadius = 0.3;

/// Ring indices of the grid: chain c, position k within the chain.
std::uint32_t grid_ring_index(int L, int chain, int position);

} // namespace linkcert
