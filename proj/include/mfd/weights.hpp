#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mfd/distance.hpp"
#include "mfd/domain.hpp"
#include "mfd/handle.hpp"

namespace mfd {

enum class Regime { Interpolating, Approximating };

std::string_view to_string(Regime regime);

struct SupportRadii {
  std::vector<double> radius;
  // Handles with r_d >= r_h: no radius satisfies r_d < r <= r_h, so virtual
  // handles must be inserted before weights can be computed.
  std::vector<int> violating;
};

// r_i = (1 - alpha) r_d + alpha r_h, alpha in (0, 1].
SupportRadii support_radii(const VoronoiPartition& partition, double alpha = 1.0);

// Assigns support_radius on every handle: support_radii for compact bases,
// the separation r_h (or r_d when r_h is infinite) for Gaussian bases.
void assign_support_radii(std::span<Handle> handles, const VoronoiPartition& partition, double alpha = 1.0);

DistanceField handle_distance_field(const SampleDomain& domain, const Handle& handle);

struct WeightEntry {
  std::uint32_t slot;  // position in handle_ids()
  double weight;
};

// Per-sample sparse weights; rows list only handles whose support covers the
// sample, in increasing slot order.
class WeightField {
 public:
  WeightField() = default;

  std::size_t sample_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t handle_count() const noexcept { return handle_ids_.size(); }
  std::span<const HandleId> handle_ids() const noexcept { return handle_ids_; }

  std::span<const WeightEntry> row(std::size_t sample) const {
    return {entries_.data() + offsets_[sample], entries_.data() + offsets_[sample + 1]};
  }
  double weight(std::size_t sample, std::size_t slot) const;
  std::vector<double> column(std::size_t slot) const;
  std::vector<double> dense_row(std::size_t sample) const;
  std::vector<double> dense() const;  // row-major sample x handle

  Regime regime() const noexcept { return regime_; }
  bool mixed_bases() const noexcept { return mixed_; }

  // Zeros are dropped. Used by importers and by tests that inject fields.
  static WeightField from_dense(std::vector<HandleId> handle_ids, std::size_t sample_count,
                                std::span<const double> values,
                                Regime regime = Regime::Interpolating);

 private:
  friend WeightField compute_weights(const SampleDomain&, std::span<const Handle>,
                                     std::span<const DistanceField>, const VoronoiPartition&);

  std::vector<HandleId> handle_ids_;
  std::vector<std::size_t> offsets_;
  std::vector<WeightEntry> entries_;
  Regime regime_ = Regime::Interpolating;
  bool mixed_ = false;
};

// Normalized closed-form weights. Handles must carry support radii. If every
// basis is compact the field is interpolating and each handle must satisfy
// r_d < r_i <= r_h (UnresolvedSupportViolation otherwise); any Gaussian basis
// switches the whole set to the approximating regime. Throws UncoveredSample
// when no support reaches a sample.
WeightField compute_weights(const SampleDomain& domain, std::span<const Handle> handles);

WeightField compute_weights(const SampleDomain& domain, std::span<const Handle> handles,
                            std::span<const DistanceField> fields, const VoronoiPartition& partition);

// Weights at an arbitrary point: the sample's own row if the query coincides
// with a sample, otherwise a reciprocal-distance blend of the k nearest rows.
std::vector<double> weights_at_query(const WeightField& field, const SampleDomain& domain,
                                     const Vec3& query, int k);

void write_weights_csv(std::ostream& out, const WeightField& field);
void write_weights_binary(std::ostream& out, const WeightField& field);
WeightField read_weights_csv(std::istream& in);
WeightField read_weights_binary(std::istream& in);

}  // namespace mfd
