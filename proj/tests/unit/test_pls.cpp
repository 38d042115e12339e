#include "helpers.hpp"

#include "linkcert/generators.hpp"
#include "linkcert/kernels.hpp"
#include "linkcert/pls.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace linkcert;
using namespace testing_helpers;

namespace {

LoopGeometry loop_of(const PolylineLoop &p) {
  return make_polyline_loop(p.vertices);
}

// Smooth random closed curve: a few Fourier modes around `center`.
PolylineLoop random_loop(std::mt19937_64 &rng, const Vec3 &center, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 a[3], b[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = Vec3(u(rng), u(rng), u(rng)) / (k + 1);
    b[k] = Vec3(u(rng), u(rng), u(rng)) / (k + 1);
  }
  PolylineLoop l;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    Vec3 p = center;
    for (int k = 0; k < 3; ++k)
      p += a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t);
    l.vertices.push_back(p);
  }
  return l;
}

} // namespace

TEST(Pls, FarCirclesGiveNoPairs) {
  const auto m = make_model({loop_of(circle(64)),
                             loop_of(circle(64, 1.0, Vec3(20, 0, 0)))});
  EXPECT_EQ(potential_link_search(m).size(), 0u);
}

TEST(Pls, HopfGivesOnePair) {
  const auto [a, b] = hopf(64);
  const auto pairs = potential_link_search(make_model({loop_of(a), loop_of(b)}));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs.pairs[0], LoopPair(0, 1));
}

TEST(Pls, OutputSortedUniqueOrdered) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SquareLinkGrid;
  spec.L = 10;
  const auto s = generate(spec);
  const auto pairs = potential_link_search(s.model);
  EXPECT_GE(pairs.size(), 25u);
  EXPECT_TRUE(std::is_sorted(pairs.pairs.begin(), pairs.pairs.end()));
  EXPECT_EQ(std::adjacent_find(pairs.pairs.begin(), pairs.pairs.end()),
            pairs.pairs.end());
  for (const auto &[i, j] : pairs.pairs)
    EXPECT_LT(i, j);
  for (const auto &e : s.expected.entries)
    EXPECT_TRUE(pairs.contains({e.i, e.j}));
}

TEST(Pls, MatchesBruteForceLoopBoxes) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0.0, 12.0);
  std::vector<LoopGeometry> loops;
  for (int k = 0; k < 150; ++k)
    loops.push_back(
        loop_of(random_loop(rng, Vec3(pos(rng), pos(rng), pos(rng)), 24)));
  const auto m = make_model(loops);
  const auto boxes = loop_aabbs(m);
  std::vector<LoopPair> want;
  for (std::uint32_t i = 0; i < m.size(); ++i)
    for (std::uint32_t j = i + 1; j < m.size(); ++j)
      if (boxes[i].overlaps(boxes[j]))
        want.emplace_back(i, j);
  EXPECT_EQ(potential_link_search(m).pairs, want);
}

TEST(Pls, ExcludedPairsRemoved) {
  const auto [a, b] = hopf(32);
  const auto m = make_model({loop_of(a), loop_of(b)});
  EXPECT_EQ(potential_link_search(m, {{0, 1}}).size(), 0u);
}

TEST(Pls, CullingIsSound) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> off(-4.0, 4.0);
  int checked = 0;
  while (checked < 200) {
    const auto a = random_loop(rng, Vec3::Zero(), 96);
    const auto b = random_loop(rng, Vec3(off(rng), off(rng), off(rng)), 96);
    const auto m = make_model({loop_of(a), loop_of(b)});
    const auto boxes = loop_aabbs(m);
    if (boxes[0].overlaps(boxes[1]))
      continue;
    EXPECT_EQ(potential_link_search(m).size(), 0u);
    EXPECT_EQ(std::lround(link_direct(a, b)), 0);
    ++checked;
  }
}

TEST(Pls, CompleteForEveryGenerator) {
  for (auto kind : {ScenarioKind::Hopf, ScenarioKind::TorusLink,
                    ScenarioKind::DoubleHelixRibbon, ScenarioKind::SquareLinkGrid,
                    ScenarioKind::PerturbedRandomLink}) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.n = 512;
    spec.T = 2;
    spec.P = 3;
    spec.L = 8;
    const auto s = generate(spec);
    const auto pairs = potential_link_search(s.model);
    ASSERT_FALSE(s.expected.entries.empty());
    for (const auto &e : s.expected.entries)
      EXPECT_TRUE(pairs.contains({e.i, e.j})) << scenario_name(kind);
  }
}

TEST(Pls, IndependentOfLoopOrder) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SquareLinkGrid;
  spec.L = 8;
  const auto s = generate(spec);
  std::vector<std::uint32_t> perm(s.model.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<LoopGeometry> shuffled(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k)
    shuffled[perm[k]] = s.model.loops[k];
  const auto original = potential_link_search(s.model);
  const auto relabeled = potential_link_search(make_model(shuffled));
  std::vector<LoopPair> mapped;
  for (const auto &[i, j] : original.pairs)
    mapped.push_back(ordered_pair(perm[i], perm[j]));
  std::sort(mapped.begin(), mapped.end());
  EXPECT_EQ(mapped, relabeled.pairs);
}
