#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfd/deform.hpp"
#include "mfd/io.hpp"
#include "mfd/virtual_handles.hpp"
#include "mfd/weights.hpp"

namespace mfd {

// Median graph edge length; segment handles are sampled at this spacing.
double typical_spacing(const SampleDomain& domain);

// Polyline vertices plus evenly spaced interior points, no step longer than spacing.
std::vector<Vec3> sample_polyline(std::span<const Vec3> vertices, double spacing);

struct BoundHandles {
  SampleDomain domain;
  std::vector<Handle> handles;
};

// Adds handle positions to the domain (reusing coincident samples) and
// returns real handles with ids 0..n-1 in input order.
BoundHandles bind_handles(const SampleDomain& domain, std::span<const HandleSpec> specs,
                          const Basis& default_basis);

struct RigOptions {
  double alpha = 1.0;
  bool insert_virtual = true;
  InsertionOptions insertion;
};

// Everything needed to deform: the bound domain, real + virtual handles with
// their distance fields and partition, the weights, and the harmonic fields
// that carry real transforms to virtual handles.
struct Rig {
  SampleDomain domain;
  HandleLayout layout;
  std::size_t real_count = 0;
  InsertionTrace trace;
  WeightField weights;
  std::optional<HarmonicFields> harmonic;

  std::span<const Handle> handles() const { return layout.handles; }
  bool interpolating() const { return weights.regime() == Regime::Interpolating; }
};

// Partition, virtual insertion when some handle violates r_d < r_h (compact
// bases only), support radii and weights.
Rig solve_rig(SampleDomain domain, std::vector<Handle> real_handles, const RigOptions& options = {});

// Recreates the handle layout of a rig whose virtual handles were recorded as
// inserted sample indices, without recomputing weights.
Rig restore_rig(SampleDomain domain, std::vector<Handle> real_handles,
                std::span<const std::size_t> virtual_sites, const RigOptions& options = {});

// Harmonic fields over the Delaunay graph of the layout; empty when there are
// no virtual handles.
std::optional<HarmonicFields> harmonic_for_layout(const HandleLayout& layout, std::size_t real_count);

// Real poses (missing ones default to identity) expanded to every handle.
TransformMap expand_transforms(const Rig& rig, const TransformMap& real_transforms);

}  // namespace mfd
