#pragma once

#include "linkcert/geometry.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace linkcert {

struct BvhNode {
  Aabb box;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaf payload: positions [begin, end) into BvhTree::order.
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  bool is_leaf() const { return left < 0; }
};

/// Binary AABB tree built by longest-axis median splits on box centers.
/// Node 0 is the root; an empty tree has no nodes.
class BvhTree {
public:
  static constexpr std::uint32_t kDefaultLeafSize = 1;

  BvhTree() = default;
  explicit BvhTree(const std::vector<Aabb> &boxes,
                   std::uint32_t max_leaf_size = kDefaultLeafSize);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return order_.size(); }
  const std::vector<BvhNode> &nodes() const { return nodes_; }
  const BvhNode &node(std::size_t i) const { return nodes_[i]; }
  const BvhNode &root() const { return nodes_.front(); }
  /// Input index of the primitive stored at leaf position `pos`.
  std::uint32_t primitive(std::uint32_t pos) const { return order_[pos]; }
  const std::vector<std::uint32_t> &order() const { return order_; }
  /// Number of edges on the longest root-to-leaf path.
  int depth() const;

private:
  struct BuildItem {
    Vec3 center;
    std::uint32_t index;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end,
                     const std::vector<Aabb> &boxes,
                     std::vector<BuildItem> &items, std::uint32_t max_leaf_size);

  std::vector<BvhNode> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Calls visit(i, j) for every primitive i of `a` and j of `b` whose boxes
/// overlap (closed test). `boxes_a`/`boxes_b` are the lists the trees were
/// built from.
template <typename Visit>
void for_each_overlap(const BvhTree &a, const std::vector<Aabb> &boxes_a,
                      const BvhTree &b, const std::vector<Aabb> &boxes_b,
                      Visit &&visit) {
  if (a.empty() || b.empty())
    return;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    const BvhNode &na = a.node(ia);
    const BvhNode &nb = b.node(ib);
    if (!na.box.overlaps(nb.box))
      continue;
    if (na.is_leaf() && nb.is_leaf()) {
      for (std::uint32_t p = na.begin; p < na.end; ++p) {
        const std::uint32_t i = a.primitive(p);
        for (std::uint32_t q = nb.begin; q < nb.end; ++q) {
          const std::uint32_t j = b.primitive(q);
          if (boxes_a[i].overlaps(boxes_b[j]))
            visit(i, j);
        }
      }
    } else if (nb.is_leaf() ||
               (!na.is_leaf() && na.box.diameter() >= nb.box.diameter())) {
      stack.push_back({na.left, ib});
      stack.push_back({na.right, ib});
    } else {
      stack.push_back({ia, nb.left});
      stack.push_back({ia, nb.right});
    }
  }
}

/// Calls visit(i) for every primitive whose box overlaps `query`.
template <typename Visit>
void for_each_overlap(const BvhTree &tree, const std::vector<Aabb> &boxes,
                      const Aabb &query, Visit &&visit) {
  if (tree.empty())
    return;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const BvhNode &n = tree.node(stack.back());
    stack.pop_back();
    if (!n.box.overlaps(query))
      continue;
    if (n.is_leaf()) {
      for (std::uint32_t p = n.begin; p < n.end; ++p)
        if (boxes[tree.primitive(p)].overlaps(query))
          visit(tree.primitive(p));
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
}

/// All (i from a, j from b) with overlapping boxes, in traversal order.
std::vector<std::pair<std::uint32_t, std::uint32_t>>
intersecting_pairs(const BvhTree &a, const std::vector<Aabb> &boxes_a,
                   const BvhTree &b, const std::vector<Aabb> &boxes_b);

} // namespace linkcert
