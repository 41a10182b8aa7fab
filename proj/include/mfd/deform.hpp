#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "mfd/domain.hpp"
#include "mfd/virtual_handles.hpp"
#include "mfd/weights.hpp"

namespace mfd {

struct DeformationResult {
  std::vector<Vec3> positions;
  Regime regime = Regime::Interpolating;
  bool mixed_bases = false;
  std::uint64_t handle_set_hash = 0;
};

// FNV-1a over handle ids, kinds and sample sets.
std::uint64_t handle_set_hash(std::span<const Handle> handles);

// Linear blend p' = sum_i w_i(p) T_i p over every sample. Throws
// MissingTransform if some handle of the field has no transform. Without
// `handles` the hash covers only the field's handle ids.
DeformationResult deform(const SampleDomain& domain, const WeightField& field, const TransformMap& transforms,
                         std::span<const Handle> handles = {});

std::vector<Vec3> blend_positions(std::span<const Vec3> positions, const WeightField& field,
                                  const TransformMap& transforms);

// Rotation about `pivot` by angle_deg around `axis`, followed by a translation.
// at(f) is the same motion with angle and translation scaled by f.
struct ProgressiveTarget {
  Vec3 axis = Vec3::UnitZ();
  double angle_deg = 0.0;
  Vec3 pivot = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Mat4 at(double fraction) const;
};

enum class WeightPolicy { Frozen, Recompute };

using WeightProvider = std::function<WeightField(const SampleDomain&)>;

struct ProgressiveOptions {
  double step_deg = 2.0;
  WeightPolicy policy = WeightPolicy::Frozen;
  // When set, virtual handles follow the real ones through harmonic
  // propagation at every pass.
  const HarmonicFields* harmonic = nullptr;
  // Called after each pass with (pass, pass_count, positions, cumulative transforms).
  std::function<void(std::size_t, std::size_t, std::span<const Vec3>, const TransformMap&)> observer;
};

std::size_t progressive_pass_count(const std::map<HandleId, ProgressiveTarget>& targets, double step_deg);

// Applies the targets in equal increments, each pass blending the incremental
// transforms T(k) T(k-1)^-1 over the current positions. The frozen policy
// keeps the initial weights; the recompute policy rebuilds the sample graph
// from the deformed positions and asks the provider for new weights.
DeformationResult deform_progressive(const SampleDomain& domain, const WeightProvider& provider,
                                     const std::map<HandleId, ProgressiveTarget>& targets,
                                     const ProgressiveOptions& options = {});

struct LocalMaximaReport {
  std::vector<HandleId> handle_ids;
  std::vector<std::vector<std::size_t>> offending;  // per handle slot, ascending

  std::size_t total() const;
  bool empty() const { return total() == 0; }
};

// Discrete no-local-maxima scan. For each handle, flags samples whose weight
// beats every graph neighbor, skipping the handle's own samples and samples
// with weight exactly 0 or 1. A plateau of equal values is flagged as a whole
// when all samples bordering it are strictly lower.
LocalMaximaReport scan_local_maxima(const SampleDomain& domain, const WeightField& field,
                                    std::span<const Handle> handles);

bool is_strict_local_max(const SampleDomain& domain, std::span<const double> values, std::size_t sample);

// Binary PPM of a 2D point set: white 1px dots on black, uniformly scaled into
// the frame with a 5% margin around the bounding box.
void write_ppm(std::ostream& out, std::span<const Vec3> positions, int width = 512, int height = 512);

}  // namespace mfd
