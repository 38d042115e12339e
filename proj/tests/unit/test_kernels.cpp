#include "helpers.hpp"

#include "linkcert/discretize.hpp"
#include "linkcert/generators.hpp"
#include "linkcert/kernels.hpp"
#include "linkcert/pls.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace linkcert;
using namespace testing_helpers;

namespace {

std::vector<PolylineLoop> discretized(const Scenario &s) {
  return discretize(s.model, potential_link_search(s.model));
}

KernelChoice with(KernelMethod m) {
  KernelChoice k;
  k.method = m;
  return k;
}

constexpr KernelMethod kAllKernels[] = {KernelMethod::CountCrossings,
                                        KernelMethod::DirectSum,
                                        KernelMethod::BarnesHut};

// A modest instance of every generator family with a linked pair (0, 1)
// where one exists.
std::vector<ScenarioSpec> family_specs() {
  std::vector<ScenarioSpec> out;
  ScenarioSpec s;
  s.kind = ScenarioKind::Hopf;
  s.n = 128;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::TorusLink;
  s.T = 2;
  s.P = 3;
  s.n = 800;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::DoubleHelixRibbon;
  s.lambda = 4;
  s.n = 2000;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::SquareLinkGrid;
  s.L = 4;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::Woundball;
  s.nu = 4;
  s.n = 800;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::PerturbedRandomLink;
  s.T = 3;
  s.P = 2;
  s.n = 512;
  s.seed = 5;
  out.push_back(s);
  s = {};
  s.kind = ScenarioKind::UnlinkedCircles;
  s.count = 2;
  s.n = 128;
  out.push_back(s);
  return out;
}

PolylineLoop reversed(const PolylineLoop &l) { return l.reversed(); }

MomentNode segment_leaf(const Vec3 &a, const Vec3 &b) {
  MomentNode n;
  const Vec3 s = b - a;
  n.center = 0.5 * (a + b);
  n.radius = 0.5 * s.norm();
  n.c_m = s;
  for (int i = 0; i < 3; ++i)
    n.c_q[i] = (s[i] / 12.0) * s * s.transpose();
  return n;
}

void collect_segments(const MomentTree &t, int node, std::vector<int> &out) {
  const auto &n = t.nodes[node];
  if (n.is_leaf()) {
    out.push_back(static_cast<int>(n.segment));
    return;
  }
  collect_segments(t, n.left, out);
  collect_segments(t, n.right, out);
}

} // namespace

// ---------------------------------------------------------------------------
// Direct summation

TEST(DirectSum, SegmentPairMatchesMidpointQuadrature) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 6) {
    const Vec3 l0(u(rng), u(rng), u(rng)), l1(u(rng), u(rng), u(rng));
    const Vec3 k0 = Vec3(u(rng), u(rng), u(rng)) + Vec3(0, 0, 1.5);
    const Vec3 k1 = Vec3(u(rng), u(rng), u(rng)) + Vec3(0, 0, 1.5);
    if (segment_distance(l0, l1, k0, k1) < 0.4)
      continue;
    // Loop 1 supplies k, loop 2 supplies l.
    const double oracle = gauss_quadrature({{k0, k1}}, {{l0, l1}}, 1 << 10);
    EXPECT_NEAR(segment_pair_lambda(l0, l1, k0, k1), oracle, 1e-6);
    ++checked;
  }
}

TEST(DirectSum, CoplanarPairIsZero) {
  EXPECT_EQ(segment_pair_lambda({0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {3, 5, 0}), 0.0);
}

TEST(DirectSum, SymmetricInSegmentRoles) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)),
        c(u(rng), u(rng), u(rng)), d(u(rng), u(rng), u(rng));
    EXPECT_NEAR(segment_pair_lambda(a, b, c, d), segment_pair_lambda(c, d, a, b),
                1e-14);
  }
}

TEST(DirectSum, ClassicLinks) {
  const auto [a, b] = hopf(64);
  for (auto v : {DsVariant::PerPairAtan, DsVariant::AngleSum}) {
    EXPECT_NEAR(link_direct(a, b, v), 1.0, 1e-9);
    EXPECT_NEAR(link_direct(circle(64), circle(64, 1.0, Vec3(20, 0, 0)), v), 0.0,
                1e-9);
  }
  ScenarioSpec spec;
  spec.kind = ScenarioKind::TorusLink;
  spec.T = 2;
  spec.P = 3;
  spec.n = 400;
  const auto loops = discretized(generate(spec));
  EXPECT_EQ(std::lround(link_direct(loops[0], loops[1])), 6);
}

TEST(DirectSum, LoopLevelMatchesQuadrature) {
  const auto [a, b] = hopf(12);
  EXPECT_NEAR(link_direct(a, b), gauss_quadrature(edges(a), edges(b), 64),
              1e-3);
}

TEST(DirectSum, VariantsAgreeOnAllFamilies) {
  for (const auto &spec : family_specs()) {
    const auto loops = discretized(generate(spec));
    for (std::size_t i = 0; i < loops.size(); ++i)
      for (std::size_t j = i + 1; j < loops.size() && j < i + 3; ++j)
        EXPECT_NEAR(link_direct(loops[i], loops[j], DsVariant::PerPairAtan),
                    link_direct(loops[i], loops[j], DsVariant::AngleSum), 1e-9)
            << scenario_name(spec.kind);
  }
}

// ---------------------------------------------------------------------------
// Counting crossings

TEST(CountCrossings, HopfAndTorus) {
  const auto [a, b] = hopf(64);
  EXPECT_EQ(link_count_crossings(a, b, {}), std::lround(link_direct(a, b)));
  ScenarioSpec spec;
  spec.kind = ScenarioKind::TorusLink;
  spec.T = 2;
  spec.P = 3;
  spec.n = 400;
  const auto loops = discretized(generate(spec));
  EXPECT_EQ(link_count_crossings(loops[0], loops[1], {}), 6);
}

TEST(CountCrossings, StableOverRandomFrames) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::PerturbedRandomLink;
  spec.T = 3;
  spec.P = 4;
  spec.n = 400;
  const auto loops = discretized(generate(spec));
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CrossingParams p;
    p.seed = seed;
    const auto r = count_crossings(loops[0], loops[1], p, seed * 7);
    EXPECT_EQ(r.value, 12);
    EXPECT_EQ(r.signed_half_crossings % 2, 0);
    EXPECT_EQ(r.signed_half_crossings, 2 * r.value);
    EXPECT_LE(r.retries, p.max_retries);
  }
}

TEST(CountCrossings, BvhPathMatchesBruteForce) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::DoubleHelixRibbon;
  spec.lambda = 7;
  spec.n = 4000;
  const auto loops = discretized(generate(spec));
  CrossingParams brute, tree;
  brute.bvh_threshold = 1u << 30;
  tree.bvh_threshold = 0;
  EXPECT_EQ(link_count_crossings(loops[0], loops[1], brute), 7);
  EXPECT_EQ(link_count_crossings(loops[0], loops[1], tree), 7);
}

TEST(CountCrossings, DegenerateInputEventuallyFails) {
  // Two identical squares: every projection is degenerate.
  PolylineLoop sq;
  sq.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  CrossingParams p;
  p.max_retries = 3;
  EXPECT_THROW(count_crossings(sq, sq, p), KernelError);
}

// ---------------------------------------------------------------------------
// Moments and far field

TEST(Moments, SingleSegmentLeaf) {
  PolylineLoop tri;
  tri.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}};
  const auto t = build_moment_tree(tri);
  for (const auto &n : t.nodes) {
    if (!n.is_leaf())
      continue;
    const Vec3 s = t.seg_end[n.segment] - t.seg_start[n.segment];
    EXPECT_EQ(n.c_m, s);
    EXPECT_TRUE(n.c_d.isZero(0.0));
    EXPECT_LT((n.center - 0.5 * (t.seg_start[n.segment] + t.seg_end[n.segment]))
                  .norm(),
              1e-15);
  }
}

TEST(Moments, MatchDirectIntegralsAtEveryNode) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolylineLoop loop;
  for (int k = 0; k < 37; ++k)
    loop.vertices.push_back(Vec3(u(rng), u(rng), u(rng)));
  const auto t = build_moment_tree(loop);
  for (std::size_t id = 0; id < t.nodes.size(); ++id) {
    const auto &n = t.nodes[id];
    std::vector<int> segs;
    collect_segments(t, static_cast<int>(id), segs);
    Vec3 cm = Vec3::Zero();
    Mat3 cd = Mat3::Zero();
    Tensor3 cq{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
    for (int s : segs) {
      const Vec3 a = t.seg_start[s], b = t.seg_end[s];
      const Vec3 d = b - a;
      const Vec3 m = 0.5 * (a + b) - n.center;
      // Exact integrals over r(t) = a + t d, t in [0, 1].
      cm += d;
      cd += d * m.transpose();
      for (int i = 0; i < 3; ++i)
        cq[i] += d[i] * (m * m.transpose() + d * d.transpose() / 12.0);
    }
    EXPECT_LT((cm - n.c_m).norm(), 1e-12);
    EXPECT_LT((cd - n.c_d).norm(), 1e-12);
    for (int i = 0; i < 3; ++i)
      EXPECT_LT((cq[i] - n.c_q[i]).norm(), 1e-12);
  }
}

TEST(Moments, ClosedLoopRootMonopoleVanishes) {
  const auto c = circle(64);
  EXPECT_LT(build_moment_tree(c).root().c_m.norm(), 1e-12 * c.length());
  for (const auto &spec : family_specs()) {
    for (const auto &l : discretized(generate(spec)))
      EXPECT_LT(build_moment_tree(l).root().c_m.norm(), 1e-9 * l.length());
  }
}

TEST(FarField, DistantLeavesMatchExactPair) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 a0(u(rng), u(rng), u(rng));
    const Vec3 a1 = a0 + Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 off = 100.0 * Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 b0 = a0 + off + 0.3 * Vec3(u(rng), u(rng), u(rng));
    const Vec3 b1 = b0 + Vec3(u(rng), u(rng), u(rng)).normalized();
    // Node 1 belongs to loop 1 (k in the direct formula).
    const double exact = segment_pair_lambda(b0, b1, a0, a1);
    const double far = far_field_eval(segment_leaf(a0, a1), segment_leaf(b0, b1));
    EXPECT_LT(std::abs(far - exact), 1e-6);
  }
}

TEST(FarField, MonopoleScalingAndClosedRoots) {
  MomentNode a = segment_leaf({0, 0, 0}, {1, 0.2, 0});
  MomentNode b = segment_leaf({0, 0, 5}, {0.1, 1, 5.3});
  const double m1 = far_field_terms(a, b).monopole;
  b.center = a.center + 2.0 * (b.center - a.center);
  const double m2 = far_field_terms(a, b).monopole;
  EXPECT_NEAR(m2 / m1, 0.25, 1e-14);

  const auto ta = build_moment_tree(circle(32));
  const auto tb = build_moment_tree(circle(32, 1.0, Vec3(10, 3, 1)));
  MomentNode ra = ta.root(), rb = tb.root();
  ra.c_m.setZero();
  rb.c_m.setZero();
  const auto terms = far_field_terms(ra, rb);
  EXPECT_EQ(terms.monopole, 0.0);
}

// ---------------------------------------------------------------------------
// Barnes-Hut

TEST(BarnesHut, HugeBetaReducesToDirectSum) {
  BarnesHutParams p;
  p.beta_init = 1e6;
  p.beta_max = 1e6;
  for (const auto &spec : family_specs()) {
    const auto loops = discretized(generate(spec));
    const auto ta = build_moment_tree(loops[0]);
    const auto tb = build_moment_tree(loops[1]);
    EXPECT_NEAR(link_barnes_hut(ta, tb, p),
                link_direct(loops[0], loops[1], DsVariant::PerPairAtan), 1e-12)
        << scenario_name(spec.kind);
  }
}

TEST(BarnesHut, HopfDefaults) {
  const auto [a, b] = hopf(64);
  EXPECT_EQ(std::lround(link_barnes_hut(build_moment_tree(a),
                                        build_moment_tree(b))),
            1);
}

TEST(BarnesHut, RibbonDefaultsWithinOneHundredth) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::DoubleHelixRibbon;
  spec.lambda = 10;
  spec.n = 20000;
  const auto loops = discretized(generate(spec));
  const auto r = barnes_hut(build_moment_tree(loops[0]),
                            build_moment_tree(loops[1]), {});
  EXPECT_LT(std::abs(r.value - 10.0), 1e-2);
  EXPECT_GE(r.beta, 2.0);
  EXPECT_LE(r.beta, 10.0);
}

TEST(BarnesHut, RerunOnlyWhenEstimateExceedsTarget) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::DoubleHelixRibbon;
  spec.lambda = 10;
  spec.n = 4000;
  const auto loops = discretized(generate(spec));
  const auto ta = build_moment_tree(loops[0]);
  const auto tb = build_moment_tree(loops[1]);
  BarnesHutParams p;
  p.e_target = 1e-12;
  const auto strict = barnes_hut(ta, tb, p);
  EXPECT_TRUE(strict.reran);
  EXPECT_DOUBLE_EQ(strict.beta, p.beta_max);
  EXPECT_GT(strict.beta_t, p.beta_init);
  p.e_target = 1e12;
  const auto loose = barnes_hut(ta, tb, p);
  EXPECT_FALSE(loose.reran);
  EXPECT_DOUBLE_EQ(loose.beta, p.beta_init);
  // beta_t follows (E / E_target)^(1/4) * beta_init.
  EXPECT_NEAR(loose.beta_t,
              std::pow(loose.error_estimate / p.e_target, 0.25) * p.beta_init,
              1e-12 * loose.beta_t);
}

// ---------------------------------------------------------------------------
// Dispatch

TEST(ComputeLink, RoundingAndFallback) {
  int calls = 0;
  auto stub = [&]() -> std::int64_t {
    ++calls;
    return 7;
  };
  LinkDiagnostics d;
  EXPECT_EQ(resolve_rounding(0.9999999, stub, d), 1);
  EXPECT_FALSE(d.fell_back);
  EXPECT_EQ(calls, 0);
  d = {};
  EXPECT_EQ(resolve_rounding(0.4, stub, d), 7);
  EXPECT_TRUE(d.fell_back);
  EXPECT_EQ(calls, 1);
  EXPECT_DOUBLE_EQ(d.raw, 0.4);
  d = {};
  EXPECT_EQ(resolve_rounding(NAN, stub, d), 7);
  EXPECT_TRUE(d.fell_back);
  d = {};
  EXPECT_EQ(resolve_rounding(-2.25, stub, d), -2);
  EXPECT_FALSE(d.fell_back);
}

TEST(ComputeLink, TorusBarnesHutRounds) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::TorusLink;
  spec.T = 2;
  spec.P = 3;
  spec.n = 2000;
  const auto loops = discretized(generate(spec));
  const auto r = compute_link(loops[0], loops[1], with(KernelMethod::BarnesHut));
  EXPECT_EQ(r.value, 6);
  EXPECT_LT(std::abs(r.diag.raw - 6.0), 0.25);
}

// ---------------------------------------------------------------------------
// Invariants over all families and kernels

TEST(KernelProperties, SymmetryOrientationRigidRefinement) {
  std::mt19937_64 rng(31);
  for (const auto &spec : family_specs()) {
    const auto s = generate(spec);
    const auto loops = discretized(s);
    const auto &a = loops[0];
    const auto &b = loops[1];
    const std::int64_t expected = s.expected.lookup(0, 1);
    const Mat3 R = random_rotation(rng);
    const Vec3 t(0.3, -1.7, 2.2);
    const auto ra = transformed(a, R, t), rb = transformed(b, R, t);
    const auto fine_a = midpoint_refined(a);
    for (auto method : kAllKernels) {
      const auto k = with(method);
      const std::string tag = scenario_name(spec.kind) + "/" + kernel_tag(method);
      EXPECT_EQ(compute_link(a, b, k).value, expected) << tag;
      EXPECT_EQ(compute_link(b, a, k).value, expected) << tag;
      EXPECT_EQ(compute_link(reversed(a), b, k).value, -expected) << tag;
      EXPECT_EQ(compute_link(reversed(a), reversed(b), k).value, expected) << tag;
      EXPECT_EQ(compute_link(ra, rb, k).value, expected) << tag;
      EXPECT_EQ(compute_link(fine_a, b, k).value, expected) << tag;
    }
    const double ds = link_direct(a, b);
    EXPECT_NEAR(link_direct(b, a), ds, 1e-9);
    EXPECT_NEAR(link_direct(ra, rb), ds, 1e-9);
    EXPECT_NEAR(link_direct(fine_a, b), ds, 1e-9);
    // Symmetric families put node pairs exactly on the acceptance threshold,
    // where a one-ulp shift flips the decision; jitter breaks those ties.
    std::normal_distribution<double> jitter(0.0, 1e-7);
    PolylineLoop ja = a, jb = b;
    for (auto *l : {&ja, &jb})
      for (auto &v : l->vertices)
        v += Vec3(jitter(rng), jitter(rng), jitter(rng));
    const Vec3 shift(4.0, 0.5, -3.0);
    const double bh = link_barnes_hut(build_moment_tree(ja), build_moment_tree(jb));
    EXPECT_NEAR(
        link_barnes_hut(build_moment_tree(transformed(ja, Mat3::Identity(), shift)),
                        build_moment_tree(transformed(jb, Mat3::Identity(), shift))),
        bh, 1e-9);
    // A rotation reshapes the axis-aligned tree, so only the approximation
    // tolerance carries over.
    EXPECT_NEAR(link_barnes_hut(build_moment_tree(ra), build_moment_tree(rb)),
                link_barnes_hut(build_moment_tree(a), build_moment_tree(b)), 1e-2);
  }
}

TEST(KernelProperties, CrossKernelAgreementOnPerturbedLinks) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::PerturbedRandomLink;
    spec.T = 1 + static_cast<int>(seed % 4);
    spec.P = 1 + static_cast<int>((seed / 4) % 4);
    spec.n = 256 + 32 * (seed % 9);
    spec.seed = seed;
    const auto loops = discretized(generate(spec));
    const auto cc = compute_link(loops[0], loops[1],
                                 with(KernelMethod::CountCrossings), seed)
                        .value;
    EXPECT_EQ(cc, spec.T * spec.P);
    EXPECT_EQ(compute_link(loops[0], loops[1], with(KernelMethod::DirectSum)).value,
              cc);
    EXPECT_EQ(compute_link(loops[0], loops[1], with(KernelMethod::BarnesHut)).value,
              cc);
  }
}
