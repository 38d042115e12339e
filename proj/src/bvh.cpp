#include "linkcert/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace linkcert {

BvhTree::BvhTree(const std::vector<Aabb> &boxes, std::uint32_t max_leaf_size) {
  if (boxes.empty())
    return;
  max_leaf_size = std::max<std::uint32_t>(max_leaf_size, 1);
  std::vector<BuildItem> items(boxes.size());
  for (std::uint32_t i = 0; i < boxes.size(); ++i)
    items[i] = {boxes[i].center(), i};
  nodes_.reserve(2 * boxes.size());
  build(0, static_cast<std::uint32_t>(boxes.size()), boxes, items, max_leaf_size);
  order_.resize(boxes.size());
  for (std::size_t p = 0; p < items.size(); ++p)
    order_[p] = items[p].index;
}

std::int32_t BvhTree::build(std::uint32_t begin, std::uint32_t end,
                            const std::vector<Aabb> &boxes,
                            std::vector<BuildItem> &items,
                            std::uint32_t max_leaf_size) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= max_leaf_size) {
    Aabb box;
    for (std::uint32_t p = begin; p < end; ++p)
      box.expand(boxes[items[p].index]);
    nodes_[id].box = box;
    return id;
  }

  Aabb center_box;
  for (std::uint32_t p = begin; p < end; ++p)
    center_box.expand(items[p].center);
  int axis = 0;
  center_box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(items.begin() + begin, items.begin() + mid,
                   items.begin() + end,
                   [axis](const BuildItem &x, const BuildItem &y) {
                     const double cx = x.center[axis];
                     const double cy = y.center[axis];
                     return cx < cy || (cx == cy && x.index < y.index);
                   });
  const std::int32_t left = build(begin, mid, boxes, items, max_leaf_size);
  const std::int32_t right = build(mid, end, boxes, items, max_leaf_size);
  // Children are complete here, so the parent box is their union.
  Aabb box = nodes_[left].box;
  box.expand(nodes_[right].box);
  nodes_[id].box = box;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

int BvhTree::depth() const {
  if (nodes_.empty())
    return 0;
  int best = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[id].is_leaf()) {
      stack.push_back({nodes_[id].left, d + 1});
      stack.push_back({nodes_[id].right, d + 1});
    }
  }
  return best;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>>
intersecting_pairs(const BvhTree &a, const std::vector<Aabb> &boxes_a,
                   const BvhTree &b, const std::vector<Aabb> &boxes_b) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for_each_overlap(a, boxes_a, b, boxes_b,
                   [&](std::uint32_t i, std::uint32_t j) {
                     out.emplace_back(i, j);
                   });
  return out;
}

} // namespace linkcert
