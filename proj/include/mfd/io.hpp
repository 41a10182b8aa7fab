#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfd/basis.hpp"
#include "mfd/deform.hpp"
#include "mfd/domain.hpp"
#include "mfd/handle.hpp"
#include "mfd/virtual_handles.hpp"

namespace mfd {

using Json = nlohmann::json;

// {"dim": 2|3, "points": [[x,y],...], "k": int (optional)}. Edges are never
// stored; they are rebuilt from k.
struct DomainFile {
  int dim = 2;
  std::vector<Vec3> points;
  std::optional<int> k;

  int effective_k() const { return k.value_or(default_k(dim)); }
};

DomainFile parse_domain(const Json& j);
Json to_json(const DomainFile& file);
Json points_to_json(std::span<const Vec3> points, int dim);
std::vector<Vec3> points_from_json(const Json& j, int dim);

// A handle as written by users: a point (by position or sample index) or a
// polyline segment that is sampled into the domain.
struct HandleSpec {
  HandleKind kind = HandleKind::Point;
  std::vector<Vec3> points;
  std::optional<std::size_t> sample;
  std::optional<Basis> basis;
};

struct HandleFile {
  std::vector<HandleSpec> handles;
  std::optional<double> alpha;
  std::optional<Basis> default_basis;
};

Basis parse_basis(const Json& j);
Json to_json(const Basis& basis);
HandleSpec parse_handle_spec(const Json& j, int dim);
HandleFile parse_handle_file(const Json& j, int dim);

// A keyed pose: matrix (row-major, (dim+1)^2 entries), quaternion [w,x,y,z]
// plus translation, or axis/angle (degrees)/pivot/translation. The last form
// is what progressive deformation needs for turns beyond 180 degrees.
struct PoseSpec {
  HandleId handle = 0;
  HandleTransform transform;
  std::optional<ProgressiveTarget> target;
};

PoseSpec parse_pose(const Json& j, int dim);
std::vector<PoseSpec> parse_poses(const Json& j, int dim);

// Angle-axis view of a pose, for progressive deformation of matrix or
// quaternion poses (rotation angle in [0, 180]).
ProgressiveTarget target_from_pose(const PoseSpec& pose);

Json trace_to_json(const InsertionTrace& trace);
// Inserted sample indices in order; the virtual handles of a rig.
std::vector<std::size_t> trace_insertions_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace mfd
