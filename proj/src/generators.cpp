#include "linkcert/generators.hpp"

#include "linkcert/kernels.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace linkcert {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::vector<Vec3> sample(std::size_t m,
                         const std::function<Vec3(double)> &curve) {
  std::vector<Vec3> pts;
  pts.reserve(m);
  for (std::size_t k = 0; k < m; ++k)
    pts.push_back(curve(kTwoPi * static_cast<double>(k) /
                        static_cast<double>(m)));
  return pts;
}

LoopGeometry as_loop(const std::vector<Vec3> &pts, bool catmull_rom) {
  return catmull_rom ? make_catmull_rom_loop(pts) : make_polyline_loop(pts);
}

std::size_t per_loop(const ScenarioSpec &spec, std::size_t loops,
                     std::size_t fallback_total) {
  const std::size_t total = spec.n ? spec.n : fallback_total;
  return std::max<std::size_t>(8, total / loops);
}

Scenario finish(std::vector<LoopGeometry> loops,
                std::vector<LinkEntry> expected) {
  Scenario s;
  s.model = make_model(std::move(loops));
  std::sort(expected.begin(), expected.end());
  s.expected.num_loops = s.model.size();
  s.expected.entries = std::move(expected);
  s.expected.model_digest = model_digest(s.model);
  s.expected.kernel_tag = "expected";
  return s;
}

// Torus link: core circle of radius 1 traversed T times, and a loop winding
// the tube P times poloidally during one toroidal pass. The poloidal sense is
// chosen so the linking number is +T*P.
Vec3 torus_core(double t, int T) {
  return Vec3(std::cos(T * t), std::sin(T * t), 0.0);
}

Vec3 torus_winding(double t, int P) {
  const double rad = 1.0 + kTorusTubeRadius * std::cos(P * t);
  return Vec3(rad * std::cos(t), rad * std::sin(t),
              -kTorusTubeRadius * std::sin(P * t));
}

// Smooth closed offset with |offset(t)| <= amplitude for all t.
std::function<Vec3(double)> smooth_jitter(std::mt19937_64 &rng,
                                          double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<Vec3, 6> coef;
  double bound = 0.0;
  for (auto &c : coef) {
    c = Vec3(u(rng), u(rng), u(rng));
    bound += c.norm();
  }
  const double scale = bound > 0.0 ? amplitude / bound : 0.0;
  return [coef, scale](double t) {
    Vec3 d = Vec3::Zero();
    for (int m = 1; m <= 3; ++m)
      d += coef[2 * (m - 1)] * std::cos(m * t) +
           coef[2 * (m - 1) + 1] * std::sin(m * t);
    return Vec3(scale * d);
  };
}

Scenario hopf(const ScenarioSpec &spec) {
  const std::size_t m = per_loop(spec, 2, 128);
  auto a = sample(m, [](double t) {
    return Vec3(std::cos(t), std::sin(t), 0.0);
  });
  auto b = sample(m, [](double t) {
    return Vec3(1.0 + std::cos(t), 0.0, -std::sin(t));
  });
  return finish({as_loop(a, spec.catmull_rom), as_loop(b, spec.catmull_rom)},
                {{0, 1, 1}});
}

Scenario unlinked(const ScenarioSpec &spec) {
  const int count = std::max(1, spec.count);
  const std::size_t m = per_loop(spec, count, 64 * count);
  constexpr int kStack = 8;
  const Mat3 tilt =
      Eigen::AngleAxisd(0.3, Vec3::UnitX()).toRotationMatrix();
  std::vector<LoopGeometry> loops;
  for (int c = 0; c < count; ++c) {
    const Vec3 center(3.0 * (c / kStack), 0.0, 0.2 * (c % kStack));
    loops.push_back(as_loop(sample(m,
                                   [&](double t) {
                                     return Vec3(
                                         center +
                                         tilt * Vec3(std::cos(t),
                                                     std::sin(t), 0.0));
                                   }),
                            spec.catmull_rom));
  }
  return finish(std::move(loops), {});
}

Scenario torus(const ScenarioSpec &spec, bool perturb) {
  const std::size_t m = per_loop(spec, 2, perturb ? 512 : 2000);
  std::function<Vec3(double)> j0 = [](double) { return Vec3(Vec3::Zero()); };
  std::function<Vec3(double)> j1 = j0;
  if (perturb) {
    std::mt19937_64 rng(spec.seed);
    const double amp = std::clamp(spec.jitter, 0.0, 0.25) * kTorusTubeRadius;
    j0 = smooth_jitter(rng, amp);
    j1 = smooth_jitter(rng, amp);
  }
  const int T = spec.T, P = spec.P;
  auto a = sample(m, [&](double t) { return Vec3(torus_core(t, T) + j0(t)); });
  auto b =
      sample(m, [&](double t) { return Vec3(torus_winding(t, P) + j1(t)); });
  const std::int64_t lambda = static_cast<std::int64_t>(T) * P;
  std::vector<LinkEntry> expected;
  if (lambda != 0)
    expected.push_back({0, 1, lambda});
  return finish({as_loop(a, spec.catmull_rom), as_loop(b, spec.catmull_rom)},
                std::move(expected));
}

// Two strands on a tube of radius 0.1 about the unit circle, opposite in
// phase, twisting `lambda` times around each other.
Scenario ribbon(const ScenarioSpec &spec) {
  const std::size_t m = per_loop(spec, 2, 20000);
  constexpr double rho = 0.1;
  const int tw = spec.lambda;
  auto strand = [&](double phase) {
    return sample(m, [&, phase](double t) {
      const Vec3 radial(std::cos(t), std::sin(t), 0.0);
      const double ang = phase - tw * t;
      return Vec3(radial + rho * (std::cos(ang) * radial +
                                  std::sin(ang) * Vec3::UnitZ()));
    });
  };
  std::vector<LinkEntry> expected;
  if (tw != 0)
    expected.push_back({0, 1, tw});
  return finish({as_loop(strand(0.0), spec.catmull_rom),
                 as_loop(strand(kPi), spec.catmull_rom)},
                std::move(expected));
}

// Square ring of side 1 with `m` vertices (a multiple of 4), in the plane
// spanned by e1, e2, traversed counterclockwise about e1 x e2.
std::vector<Vec3> square_ring(const Vec3 &center, const Vec3 &e1,
                              const Vec3 &e2, std::size_t m) {
  const std::size_t per_side = m / 4;
  const Vec3 corners[4] = {center + 0.5 * (-e1 - e2), center + 0.5 * (e1 - e2),
                           center + 0.5 * (e1 + e2), center + 0.5 * (-e1 + e2)};
  std::vector<Vec3> pts;
  for (int s = 0; s < 4; ++s) {
    const Vec3 &p = corners[s];
    const Vec3 &q = corners[(s + 1) % 4];
    for (std::size_t k = 0; k < per_side; ++k)
      pts.push_back(p + (q - p) * (static_cast<double>(k) / per_side));
  }
  return pts;
}

// Linking number of a loop with a planar convex polygon, counted as signed
// crossings of the loop through the polygon's interior. The polygon normal
// follows its vertex order by the right-hand rule.
std::int64_t planar_link(const std::vector<Vec3> &polygon, const Vec3 &normal,
                         const std::vector<Vec3> &loop) {
  const Vec3 origin = polygon.front();
  std::int64_t total = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3 &p = loop[i];
    const Vec3 &q = loop[(i + 1) % loop.size()];
    const double hp = normal.dot(p - origin);
    const double hq = normal.dot(q - origin);
    if ((hp > 0) == (hq > 0) || hp == hq)
      continue;
    const Vec3 x = p + (q - p) * (hp / (hp - hq));
    bool inside = true;
    for (std::size_t k = 0; k < polygon.size() && inside; ++k) {
      const Vec3 &a = polygon[k];
      const Vec3 &b = polygon[(k + 1) % polygon.size()];
      inside = normal.dot((b - a).cross(x - a)) > 0.0;
    }
    if (inside)
      total += hq > hp ? 1 : -1;
  }
  return total;
}

Scenario grid(const ScenarioSpec &spec) {
  const int L = std::max(2, spec.L - spec.L % 2);
  const int chains = L / 2;
  const int per_chain = L / 2 + 1;
  const std::size_t rings = static_cast<std::size_t>(chains) * per_chain;
  std::size_t m = spec.n ? spec.n / rings : 16;
  m = std::max<std::size_t>(8, m - m % 4);

  constexpr double kSpacing = 0.75;
  constexpr double kChainGap = 2.0;
  std::vector<std::vector<Vec3>> polys;
  std::vector<Vec3> normals;
  for (int c = 0; c < chains; ++c) {
    for (int k = 0; k < per_chain; ++k) {
      const Vec3 center(kSpacing * k, kChainGap * c, 0.0);
      if (k % 2 == 0) {
        polys.push_back(square_ring(center, Vec3::UnitX(), Vec3::UnitY(), m));
        normals.push_back(Vec3::UnitZ());
      } else {
        polys.push_back(square_ring(center, Vec3::UnitX(), Vec3::UnitZ(), m));
        normals.push_back(-Vec3::UnitY());
      }
    }
  }
  std::vector<LinkEntry> expected;
  std::vector<LoopGeometry> loops;
  for (int c = 0; c < chains; ++c) {
    for (int k = 0; k + 1 < per_chain; ++k) {
      const auto a = grid_ring_index(L, c, k);
      const std::int64_t lk = planar_link(polys[a], normals[a], polys[a + 1]);
      if (lk != 0)
        expected.push_back({a, a + 1, lk});
    }
  }
  for (const auto &p : polys)
    loops.push_back(as_loop(p, false));
  return finish(std::move(loops), std::move(expected));
}

// Spherical windings r(t) = R (sin(nu t) cos t, sin(nu t) sin t, cos(nu t)),
// passing the poles nu times; the outer one (R = 2) is rotated.
Scenario woundball(const ScenarioSpec &spec) {
  const int nu = std::max(1, spec.nu);
  const std::size_t m = per_loop(spec, 2, 400 * static_cast<std::size_t>(nu));
  const Mat3 rot =
      Eigen::AngleAxisd(0.7, Vec3(1.0, 1.0, 0.0).normalized()).toRotationMatrix();
  auto wind = [&](double R, const Mat3 &frame) {
    return sample(m, [&, R](double t) {
      const double s = std::sin(nu * t);
      return Vec3(frame * (R * Vec3(s * std::cos(t), s * std::sin(t),
                                    std::cos(nu * t))));
    });
  };
  return finish({as_loop(wind(1.0, Mat3::Identity()), spec.catmull_rom),
                 as_loop(wind(2.0, rot), spec.catmull_rom)},
                {});
}

} // namespace

std::uint32_t grid_ring_index(int L, int chain, int position) {
  return static_cast<std::uint32_t>(chain * (L / 2 + 1) + position);
}

Scenario generate(const ScenarioSpec &spec) {
  switch (spec.kind) {
  case ScenarioKind::Hopf:
    return hopf(spec);
  case ScenarioKind::UnlinkedCircles:
    return unlinked(spec);
  case ScenarioKind::TorusLink:
    return torus(spec, false);
  case ScenarioKind::DoubleHelixRibbon:
    return ribbon(spec);
  case ScenarioKind::SquareLinkGrid:
    return grid(spec);
  case ScenarioKind::Woundball:
    return woundball(spec);
  case ScenarioKind::PerturbedRandomLink:
    return torus(spec, true);
  }
  throw ValidationError("unknown scenario kind");
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
  case ScenarioKind::Hopf:
    return "hopf";
  case ScenarioKind::UnlinkedCircles:
    return "unlinked";
  case ScenarioKind::TorusLink:
    return "torus";
  case ScenarioKind::DoubleHelixRibbon:
    return "ribbon";
  case ScenarioKind::SquareLinkGrid:
    return "grid";
  case ScenarioKind::Woundball:
    return "woundball";
  case ScenarioKind::PerturbedRandomLink:
    return "perturbed";
  }
  return "?";
}

ScenarioKind scenario_from_name(const std::string &name) {
  for (auto k : {ScenarioKind::Hopf, ScenarioKind::UnlinkedCircles,
                 ScenarioKind::TorusLink, ScenarioKind::DoubleHelixRibbon,
                 ScenarioKind::SquareLinkGrid, ScenarioKind::Woundball,
                 ScenarioKind::PerturbedRandomLink})
    if (scenario_name(k) == name)
      return k;
  throw ParseError("unknown scenario \"" + name + "\"");
}

} // namespace linkcert
