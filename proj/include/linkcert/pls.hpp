#pragma once

#include "linkcert/model.hpp"

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace linkcert {

using LoopPair = std::pair<std::uint32_t, std::uint32_t>;
using PairSet = std::set<LoopPair>;

/// Orders a pair so first < second.
inline LoopPair ordered_pair(std::uint32_t a, std::uint32_t b) {
  return a < b ? LoopPair{a, b} : LoopPair{b, a};
}

struct PairList {
  std::vector<LoopPair> pairs;  // i < j, sorted, unique

  std::size_t size() const { return pairs.size(); }
  bool contains(const LoopPair &p) const;
};

/// Union of the tight boxes of a loop's segments.
Aabb loop_aabb(const LoopGeometry &loop);
std::vector<Aabb> loop_aabbs(const CurveModel &model);

/// Every loop pair whose boxes overlap, minus `excluded`.
PairList potential_link_search(const CurveModel &model,
                               const PairSet &excluded = {});

} // namespace linkcert
