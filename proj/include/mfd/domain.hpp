#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfd/types.hpp"

namespace mfd {

struct Edge {
  std::size_t a;  // a < b
  std::size_t b;
  double length;
};

struct Neighbor {
  std::uint32_t index;
  double length;
};

int default_k(int dim);

// Point samples of the deformation domain plus the symmetric k-nearest-neighbor
// graph whose shortest paths approximate intrinsic distance. Immutable once
// built; insert_points returns a new value.
class SampleDomain {
 public:
  SampleDomain() = default;

  int dim() const noexcept { return dim_; }
  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return positions_.size(); }

  const Vec3& position(std::size_t i) const { return positions_[i]; }
  std::span<const Vec3> positions() const noexcept { return positions_; }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t component_of(std::size_t i) const { return component_of_[i]; }
  std::size_t component_count() const noexcept { return component_count_; }
  std::vector<std::vector<std::size_t>> components() const;

 private:
  friend SampleDomain assemble_domain(int dim, int k, std::vector<Vec3> positions,
                                      std::vector<Edge> edges);

  int dim_ = 0;
  int k_ = 0;
  std::vector<Vec3> positions_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::size_t> component_of_;
  std::size_t component_count_ = 0;
};

// Builds the domain from raw samples. For dim == 2 the z components must be 0.
// Throws DegenerateInput (< 2 points, bad dim, non-finite) or DuplicatePoints.
SampleDomain build_domain(std::span<const Vec3> positions, int dim, int k);

struct InsertResult {
  SampleDomain domain;
  // Index of each requested position in the returned domain, in input order.
  std::vector<std::size_t> indices;
};

// Appends samples, each linked to its k nearest samples present at the time
// of its insertion. A position coinciding with an existing sample reuses it.
// Existing edges are preserved verbatim.
InsertResult insert_points(const SampleDomain& domain, std::span<const Vec3> new_positions, int k);

// Internal constructor shared by build/insert/tests: computes adjacency and
// components from an explicit edge list (edges need not be canonical).
SampleDomain assemble_domain(int dim, int k, std::vector<Vec3> positions, std::vector<Edge> edges);

}  // namespace mfd
