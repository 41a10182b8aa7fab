#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfd/pipeline.hpp"

namespace mfd {

enum class CheckStatus { Pass, Fail, Skip };
std::string_view to_string(CheckStatus status);

struct CheckRow {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  std::optional<int> mirror_axis;  // 0, 1 or 2: reflect about the bounding-box midplane
  std::size_t random_transforms = 20;
  std::size_t oracle_graphs = 8;
  std::size_t oracle_nodes = 50;
};

// The invariant suite run by `mfd check`, one row per property.
std::vector<CheckRow> run_checks(const Rig& rig, const CheckOptions& options = {});

// Bellman-Ford single-source distances on an explicit edge list.
std::vector<double> bellman_ford(std::size_t node_count, std::span<const Edge> edges, std::size_t source);

// sigma(p) for a reflection of the domain, or nullopt if some sample has no
// mirror image within 1e-9 of the bounding-box diagonal.
std::optional<std::vector<std::size_t>> mirror_permutation(const SampleDomain& domain, int axis);

}  // namespace mfd
