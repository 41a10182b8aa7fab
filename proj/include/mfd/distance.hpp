#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mfd/domain.hpp"
#include "mfd/handle.hpp"

namespace mfd {

struct DistanceField {
  std::vector<std::size_t> sources;
  std::vector<double> distance;  // +inf where unreachable
};

// Exact graph shortest-path distances from the nearest source (binary-heap
// Dijkstra, O(E log V)). Throws EmptySources or InvalidArgument.
DistanceField multi_source_distances(const SampleDomain& domain, std::span<const std::size_t> sources);

// Brings a field computed on an earlier version of `domain` (the first
// `old_size` samples) up to date after insert_points: new samples get their
// distances and any shortcut through them is propagated.
void extend_distance_field(DistanceField& field, const SampleDomain& domain, std::size_t old_size);

// One distance field per handle, sourced at the handle's sample set. Fields are
// computed in parallel; each slot depends only on its own handle.
std::vector<DistanceField> handle_distance_fields(const SampleDomain& domain,
                                                  std::span<const Handle> handles);

struct VoronoiPartition {
  std::vector<int> cell_of;                 // owning handle id, -1 if unreachable
  std::vector<double> r_d;                  // cell radius
  std::vector<double> r_h;                  // minimal non-zero separation, +inf if none
  std::vector<std::size_t> farthest_sample; // lowest-index sample realizing r_d
  std::vector<std::pair<int, int>> adjacency;  // (i, j) with i < j, sorted

  std::size_t handle_count() const { return r_d.size(); }
  double delta(std::size_t h) const { return r_d[h] - r_h[h]; }
};

// Geodesic Voronoi partition sited at the handles, with ties going to the
// lowest handle id. Throws UncoveredComponent when some connected component
// holds no handle sample.
VoronoiPartition voronoi_partition(const SampleDomain& domain, std::span<const Handle> handles);

// Same, from precomputed per-handle distance fields.
VoronoiPartition voronoi_from_fields(const SampleDomain& domain, std::span<const Handle> handles,
                                     std::span<const DistanceField> fields);

struct HandleGraph {
  std::size_t node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> neighbors;  // sorted
  std::vector<int> isolated;                // nodes with no incident edge
};

// Dual of the partition: handles as nodes, an edge per pair of touching cells.
HandleGraph delaunay_graph(const VoronoiPartition& partition);

}  // namespace mfd
