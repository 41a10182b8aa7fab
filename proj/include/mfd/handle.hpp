#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mfd/basis.hpp"
#include "mfd/types.hpp"

namespace mfd {

enum class HandleKind { Point, Segment, Virtual };

std::string_view to_string(HandleKind kind);

// A real or virtual handle bound to a domain. Handle ids are positions in the
// handle list: real handles first, virtual handles appended in insertion order.
struct Handle {
  HandleId id = 0;
  HandleKind kind = HandleKind::Point;
  std::vector<std::size_t> samples;  // point and virtual handles hold exactly one
  Basis basis = quintic_basis();
  // Compact bases: support radius r_i. Gaussian bases: the separation r_h used
  // to normalize distances. 0 means not assigned yet.
  double support_radius = 0.0;

  std::size_t origin() const { return samples.front(); }
  bool is_real() const { return kind != HandleKind::Virtual; }
};

// Throws InvalidArgument if ids are not 0..n-1 in order, sample sets are empty
// or out of range, or point handles have more than one sample.
void validate_handles(std::span<const Handle> handles, std::size_t sample_count);

}  // namespace mfd
