#include "mfd/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace mfd {
namespace {

constexpr std::uint32_t kLeafSize = 12;

bool closer(const NeighborHit& a, const NeighborHit& b) {
  if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
  return a.index < b.index;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, int dim) : points_(points), dim_(dim) {
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(kInfinity);
  Vec3 hi = Vec3::Constant(-kInfinity);
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  for (int a = 1; a < dim_; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<NeighborHit> KdTree::nearest(const Vec3& query, std::size_t k,
                                         std::size_t exclude) const {
  std::vector<NeighborHit> heap;
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  search(0, query, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::search(std::int32_t node_id, const Vec3& query, std::size_t k, std::size_t exclude,
                    std::vector<NeighborHit>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t p = order_[i];
      if (p == exclude) continue;
      const NeighborHit hit{p, (points_[p] - query).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(hit);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(hit, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = hit;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double delta = query[node.axis] - node.split;
  const std::int32_t first = delta < 0 ? node.left : node.right;
  const std::int32_t second = delta < 0 ? node.right : node.left;
  search(first, query, k, exclude, heap);
  // Equality keeps ties on the far side reachable.
  if (heap.size() < k || delta * delta <= heap.front().squared_distance) {
    search(second, query, k, exclude, heap);
  }
}

}  // namespace mfd
