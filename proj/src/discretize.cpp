#include "linkcert/discretize.hpp"

#include "linkcert/bvh.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace linkcert {

namespace {

std::string describe(DiscretizationErrorKind kind,
                     const std::vector<std::uint32_t> &loops) {
  auto list = [&] {
    std::string s;
    for (std::size_t k = 0; k < loops.size(); ++k)
      s += (k ? ", " : "") + std::to_string(loops[k]);
    return s;
  };
  switch (kind) {
  case DiscretizationErrorKind::ZeroLengthInput:
    return "Input has zero-length segments (loop " + list() + ").";
  case DiscretizationErrorKind::CurvesIntersect:
    return "Curves " + std::to_string(loops.at(0)) + " and " +
           std::to_string(loops.at(1)) + " intersect.";
  case DiscretizationErrorKind::PassLimitExceeded:
    return "Discretization pass limit reached with work remaining (loops " +
           list() + ").";
  }
  return "discretization error";
}

struct Piece {
  CubicSegment seg;
  Aabb box;
  std::uint32_t source = 0;
};

struct Chord {
  std::uint32_t source;
  double t_lo;
  Vec3 start;
};

constexpr std::uint32_t kNoPartner = std::numeric_limits<std::uint32_t>::max();

} // namespace

DiscretizationError::DiscretizationError(DiscretizationErrorKind kind,
                                         std::vector<std::uint32_t> loops)
    : LinkcertError(describe(kind, loops)), kind_(kind),
      loops_(std::move(loops)) {}

std::vector<PolylineLoop> discretize(const CurveModel &model,
                                     const PairList &pairs,
                                     const DiscretizationParams &params,
                                     DiscretizationStats *stats) {
  const std::size_t L = model.loops.size();
  const double min_diameter = params.epsilon * model.xi;
  DiscretizationStats local;
  DiscretizationStats &st = stats ? *stats : local;
  st = DiscretizationStats{};

  std::vector<std::vector<std::uint32_t>> partners(L);
  for (const auto &[i, j] : pairs.pairs) {
    partners[i].push_back(j);
    partners[j].push_back(i);
  }
  for (auto &p : partners) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }

  std::vector<std::vector<Piece>> pending(L);
  std::vector<std::vector<Chord>> chords(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto &loop = model.loops[i];
    st.input_segments += loop.segments.size();
    for (std::uint32_t s = 0; s < loop.segments.size(); ++s) {
      const auto &seg = loop.segments[s];
      const Aabb box = tight_aabb(seg);
      if (!(cubic_extent(seg).diameter() >= min_diameter))
        throw DiscretizationError(DiscretizationErrorKind::ZeroLengthInput,
                                  {static_cast<std::uint32_t>(i)});
      if (partners[i].empty())
        chords[i].push_back({s, seg.t_lo, seg.start()});
      else
        pending[i].push_back({seg, box, s});
    }
  }

  std::vector<BvhTree> trees(L);
  std::vector<std::vector<Aabb>> boxes(L);
  std::vector<std::optional<DiscretizationError>> errors(L);
  const auto nloops = static_cast<std::ptrdiff_t>(L);

  auto work_remaining = [&] {
    return std::any_of(pending.begin(), pending.end(),
                       [](const auto &p) { return !p.empty(); });
  };

  while (work_remaining()) {
    if (st.passes >= params.max_passes) {
      std::vector<std::uint32_t> stuck;
      for (std::size_t i = 0; i < L; ++i)
        if (!pending[i].empty())
          stuck.push_back(static_cast<std::uint32_t>(i));
      throw DiscretizationError(DiscretizationErrorKind::PassLimitExceeded,
                                std::move(stuck));
    }
    ++st.passes;

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < nloops; ++i) {
      boxes[i].clear();
      for (const auto &p : pending[i])
        boxes[i].push_back(p.box);
      trees[i] = BvhTree(boxes[i]);
    }

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < nloops; ++i) {
      auto &current = pending[i];
      if (current.empty())
        continue;
      std::vector<std::uint32_t> partner_of(current.size(), kNoPartner);
      for (const std::uint32_t j : partners[i]) {
        for_each_overlap(trees[i], boxes[i], trees[j], boxes[j],
                         [&](std::uint32_t k, std::uint32_t) {
                           partner_of[k] = std::min(partner_of[k], j);
                         });
      }
      std::vector<Piece> next;
      for (std::size_t k = 0; k < current.size(); ++k) {
        const Piece &piece = current[k];
        bool split = partner_of[k] != kNoPartner;
        // A piece that closes on itself would give a zero-length chord.
        if (!split &&
            !((piece.seg.end() - piece.seg.start()).norm() > min_diameter))
          split = true;
        if (!split) {
          chords[i].push_back(
              {piece.source, piece.seg.t_lo, piece.seg.start()});
          continue;
        }
        const auto [a, b] = split_cubic(piece.seg);
        const Aabb box_a = tight_aabb(a);
        const Aabb box_b = tight_aabb(b);
        // The rounding pad does not shrink with the window, so the exit
        // test uses the unpadded extent.
        if (!(cubic_extent(a).diameter() >= min_diameter) ||
            !(cubic_extent(b).diameter() >= min_diameter)) {
          const auto self = static_cast<std::uint32_t>(i);
          if (partner_of[k] == kNoPartner)
            errors[i].emplace(DiscretizationErrorKind::ZeroLengthInput,
                              std::vector<std::uint32_t>{self});
          else
            errors[i].emplace(
                DiscretizationErrorKind::CurvesIntersect,
                std::vector<std::uint32_t>{std::min(self, partner_of[k]),
                                           std::max(self, partner_of[k])});
          break;
        }
        next.push_back({a, box_a, piece.source});
        next.push_back({b, box_b, piece.source});
      }
      current = std::move(next);
    }

    for (auto &e : errors)
      if (e)
        throw *e;
  }

  std::vector<PolylineLoop> out(L);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < nloops; ++i) {
    auto &c = chords[i];
    std::sort(c.begin(), c.end(), [](const Chord &x, const Chord &y) {
      return x.source < y.source || (x.source == y.source && x.t_lo < y.t_lo);
    });
    out[i].vertices.reserve(c.size());
    for (const auto &chord : c)
      out[i].vertices.push_back(chord.start);
  }
  for (const auto &p : out)
    st.output_segments += p.size();
  return out;
}

std::vector<PolylineLoop> uniform_discretize(const CurveModel &model,
                                             int pieces) {
  std::vector<PolylineLoop> out(model.loops.size());
  for (std::size_t i = 0; i < model.loops.size(); ++i) {
    for (const auto &seg : model.loops[i].segments) {
      const double w = (seg.t_hi - seg.t_lo) / pieces;
      for (int k = 0; k < pieces; ++k)
        out[i].vertices.push_back(seg.eval(seg.t_lo + k * w));
    }
  }
  return out;
}

} // namespace linkcert
