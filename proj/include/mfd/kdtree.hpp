#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfd/types.hpp"

namespace mfd {

struct NeighborHit {
  std::uint32_t index;
  double squared_distance;
};

// Static kd-tree over a fixed point array. Ties in distance resolve to the
// lower point index so queries are deterministic.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, int dim);

  // The k nearest points to `query`, closest first. `exclude` (if a valid
  // index) is skipped, which is how self-matches are dropped.
  std::vector<NeighborHit> nearest(const Vec3& query, std::size_t k,
                                   std::size_t exclude = static_cast<std::size_t>(-1)) const;

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& query, std::size_t k, std::size_t exclude,
              std::vector<NeighborHit>& heap) const;

  std::span<const Vec3> points_;
  int dim_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace mfd
