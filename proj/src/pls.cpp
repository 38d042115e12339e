#include "linkcert/pls.hpp"

#include "linkcert/bvh.hpp"

#include <algorithm>

namespace linkcert {

bool PairList::contains(const LoopPair &p) const {
  return std::binary_search(pairs.begin(), pairs.end(), p);
}

Aabb loop_aabb(const LoopGeometry &loop) {
  Aabb box;
  for (const auto &seg : loop.segments)
    box.expand(tight_aabb(seg));
  return box;
}

std::vector<Aabb> loop_aabbs(const CurveModel &model) {
  std::vector<Aabb> boxes(model.loops.size());
  const auto n = static_cast<std::ptrdiff_t>(model.loops.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    boxes[i] = loop_aabb(model.loops[i]);
  return boxes;
}

PairList potential_link_search(const CurveModel &model,
                               const PairSet &excluded) {
  PairList out;
  if (model.loops.empty())
    return out;
  const auto boxes = loop_aabbs(model);
  const BvhTree tree(boxes);
  for_each_overlap(tree, boxes, tree, boxes,
                   [&](std::uint32_t i, std::uint32_t j) {
                     if (i < j && !excluded.count({i, j}) && !excluded.count({j, i}))
                       out.pairs.emplace_back(i, j);
                   });
  std::sort(out.pairs.begin(), out.pairs.end());
  out.pairs.erase(std::unique(out.pairs.begin(), out.pairs.end()),
                  out.pairs.end());
  return out;
}

} // namespace linkcert
