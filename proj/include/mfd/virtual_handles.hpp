#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mfd/distance.hpp"
#include "mfd/handle.hpp"
#include "mfd/transform.hpp"

namespace mfd {

struct InsertionStep {
  HandleId handle;             // h_m, the handle whose cell received the new site
  std::size_t inserted_index;  // sample hosting the new virtual handle
  double score;                // max delta / r_d before the insertion
  double rd_before;
  double rd_after;
  double rh_before;
  double rh_after;
  // Samples of the cell at distance r_d. When several tie, one insertion only
  // removes some of them and r_d stays put until the last one is reassigned.
  std::size_t farthest_before;
  std::size_t farthest_after;
};

struct InsertionTrace {
  std::vector<InsertionStep> steps;
  std::vector<Handle> final_handles;
  // Steps whose score exceeded the previous step's. Not an error: the greedy
  // loop only guarantees a decrease for the handle it just split.
  std::size_t score_increases = 0;
};

struct InsertionOptions {
  std::optional<std::size_t> max_insertions;  // default: 10 |H| + 100
  Basis virtual_basis = quintic_basis();
};

std::size_t default_insertion_budget(std::size_t handle_count);

// Working set for the insertion loop; fields and partition are kept in sync
// with handles so callers can reuse them for weight computation.
struct HandleLayout {
  std::vector<Handle> handles;
  std::vector<DistanceField> fields;
  VoronoiPartition partition;
};

HandleLayout make_layout(const SampleDomain& domain, std::vector<Handle> handles);

// Greedy virtual handle insertion: while some handle has r_d >= r_h, split the
// handle maximizing (r_d - r_h) / r_d by placing a virtual point handle on the
// lowest-index sample of its cell at distance r_d. Throws
// InsertionBudgetExceeded.
InsertionTrace insert_virtual_handles(const SampleDomain& domain, HandleLayout& layout,
                                      const InsertionOptions& options = {});

InsertionTrace insert_virtual_handles(const SampleDomain& domain, std::span<const Handle> handles,
                                      const InsertionOptions& options = {});

struct HarmonicFields {
  std::vector<HandleId> real_ids;               // ascending
  std::vector<std::vector<double>> values;      // values[r][node] for real_ids[r]
  std::vector<double> sum;                      // per node
  std::size_t iterations = 0;

  std::size_t node_count() const { return sum.size(); }
};

struct HarmonicOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

// Discrete harmonic fields on the handle graph with the uniform Laplacian:
// field r is pinned to 1 at real_ids[r] and 0 at the other real handles.
// Throws IsolatedVirtualHandle or NonConvergence.
HarmonicFields solve_harmonic_fields(const HandleGraph& graph, std::span<const HandleId> real_ids,
                                     const HarmonicOptions& options = {});

using TransformMap = std::map<HandleId, HandleTransform>;

// Real handles keep their transforms; each virtual handle gets the
// harmonic-weighted mean of the real (quaternion, translation) pairs, with
// quaternions first flipped into the hemisphere of the lowest-id real handle
// and the mean renormalized.
TransformMap propagate_transforms(const HarmonicFields& fields, const TransformMap& real_transforms);

}  // namespace mfd
