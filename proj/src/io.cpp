#include "mfd/io.hpp"

#include <cmath>
#include <fstream>

#include "mfd/error.hpp"

namespace mfd {
namespace {

[[noreturn]] void parse_fail(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

Vec3 vec_from_json(const Json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    parse_fail("expected a coordinate with " + std::to_string(dim) + " components");
  }
  Vec3 v = Vec3::Zero();
  for (int a = 0; a < dim; ++a) {
    if (!j[a].is_number()) parse_fail("coordinates must be numbers");
    v[a] = j[a].get<double>();
  }
  return v;
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) parse_fail("expected a 2 or 3 component vector");
  Vec3 v = Vec3::Zero();
  for (std::size_t a = 0; a < j.size(); ++a) v[static_cast<int>(a)] = j[a].get<double>();
  return v;
}

}  // namespace

std::vector<Vec3> points_from_json(const Json& j, int dim) {
  if (!j.is_array()) parse_fail("\"points\" must be an array");
  std::vector<Vec3> out;
  out.reserve(j.size());
  for (const Json& p : j) out.push_back(vec_from_json(p, dim));
  return out;
}

Json points_to_json(std::span<const Vec3> points, int dim) {
  Json arr = Json::array();
  for (const Vec3& p : points) {
    Json c = Json::array();
    for (int a = 0; a < dim; ++a) c.push_back(p[a]);
    arr.push_back(std::move(c));
  }
  return arr;
}

DomainFile parse_domain(const Json& j) {
  if (!j.is_object()) parse_fail("domain document must be an object");
  DomainFile f;
  if (!j.contains("dim") || !j["dim"].is_number_integer()) parse_fail("domain needs integer \"dim\"");
  f.dim = j["dim"].get<int>();
  if (f.dim != 2 && f.dim != 3) parse_fail("\"dim\" must be 2 or 3");
  if (!j.contains("points")) parse_fail("domain needs \"points\"");
  f.points = points_from_json(j["points"], f.dim);
  if (j.contains("k")) {
    if (!j["k"].is_number_integer() || j["k"].get<int>() < 1) parse_fail("\"k\" must be a positive integer");
    f.k = j["k"].get<int>();
  }
  return f;
}

Json to_json(const DomainFile& file) {
  Json j;
  j["dim"] = file.dim;
  j["points"] = points_to_json(file.points, file.dim);
  if (file.k) j["k"] = *file.k;
  return j;
}

Basis parse_basis(const Json& j) {
  if (!j.is_object() || !j.contains("type")) parse_fail("basis needs a \"type\"");
  const std::string type = j["type"].get<std::string>();
  if (type == "bezier") {
    const int n = j.value("n", 5);
    if (j.contains("interior")) {
      const auto interior = j["interior"].get<std::vector<double>>();
      return make_bezier_basis(n, std::span<const double>(interior));
    }
    return make_bezier_basis(n);
  }
  if (type == "gaussian") {
    if (!j.contains("c") || (j["c"].is_string() && j["c"].get<std::string>() == "auto")) {
      return make_gaussian_basis();
    }
    if (!j["c"].is_number()) parse_fail("gaussian \"c\" must be a number or \"auto\"");
    return make_gaussian_basis(j["c"].get<double>());
  }
  parse_fail("unknown basis type \"" + type + "\"");
}

Json to_json(const Basis& basis) {
  Json j;
  if (const auto* b = std::get_if<BezierBasis>(&basis)) {
    j["type"] = "bezier";
    j["n"] = b->degree();
    const auto y = b->control_y();
    j["interior"] = std::vector<double>(y.begin() + 3, y.end() - 3);
  } else {
    const auto& g = std::get<GaussianBasis>(basis);
    j["type"] = "gaussian";
    if (g.c) {
      j["c"] = *g.c;
    } else {
      j["c"] = "auto";
    }
  }
  return j;
}

HandleSpec parse_handle_spec(const Json& j, int dim) {
  if (!j.is_object()) parse_fail("handle must be an object");
  HandleSpec spec;
  const std::string kind = j.value("kind", std::string("point"));
  if (kind == "point") {
    spec.kind = HandleKind::Point;
    if (j.contains("sample")) {
      spec.sample = j["sample"].get<std::size_t>();
    } else if (j.contains("position")) {
      spec.points.push_back(vec_from_json(j["position"], dim));
    } else {
      parse_fail("point handle needs \"position\" or \"sample\"");
    }
  } else if (kind == "segment") {
    spec.kind = HandleKind::Segment;
    if (!j.contains("points")) parse_fail("segment handle needs \"points\"");
    spec.points = points_from_json(j["points"], dim);
    if (spec.points.size() < 2) parse_fail("segment handle needs at least 2 points");
  } else {
    parse_fail("unknown handle kind \"" + kind + "\"");
  }
  if (j.contains("basis")) spec.basis = parse_basis(j["basis"]);
  return spec;
}

HandleFile parse_handle_file(const Json& j, int dim) {
  HandleFile f;
  const Json* list = &j;
  if (j.is_object()) {
    if (!j.contains("handles")) parse_fail("handle file needs \"handles\"");
    list = &j["handles"];
    if (j.contains("alpha")) f.alpha = j["alpha"].get<double>();
    if (j.contains("basis")) f.default_basis = parse_basis(j["basis"]);
  }
  if (!list->is_array()) parse_fail("\"handles\" must be an array");
  for (const Json& h : *list) f.handles.push_back(parse_handle_spec(h, dim));
  return f;
}

PoseSpec parse_pose(const Json& j, int dim) {
  if (!j.is_object() || !j.contains("handle")) parse_fail("pose needs \"handle\"");
  PoseSpec pose;
  pose.handle = j["handle"].get<HandleId>();
  if (j.contains("matrix")) {
    const auto m = j["matrix"].get<std::vector<double>>();
    const std::size_t side = static_cast<std::size_t>(dim) + 1;
    if (m.size() != side * side) {
      parse_fail("pose matrix must have " + std::to_string(side * side) + " entries");
    }
    Mat4 full;
    if (dim == 2) {
      Eigen::Matrix3d planar;
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) planar(r, c) = m[r * 3 + c];
      full = embed_planar(planar);
    } else {
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) full(r, c) = m[r * 4 + c];
    }
    if (!full.allFinite() || (full.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
      parse_fail("pose matrix must be finite and affine");
    }
    pose.transform = HandleTransform::from_matrix(full);
  } else if (j.contains("quaternion")) {
    const auto q = j["quaternion"].get<std::vector<double>>();
    if (q.size() != 4) parse_fail("quaternion must be [w, x, y, z]");
    RigidMotion motion;
    motion.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
    if (motion.rotation.norm() < 1e-12) parse_fail("quaternion must be non-zero");
    motion.rotation.normalize();
    if (dim == 2 && (std::abs(motion.rotation.x()) > 1e-12 || std::abs(motion.rotation.y()) > 1e-12)) {
      parse_fail("planar poses rotate about z: quaternion x and y must be 0");
    }
    if (j.contains("translation")) motion.translation = vec_from_json(j["translation"], dim);
    pose.transform = HandleTransform::from_rigid(motion);
  } else if (j.contains("angle")) {
    ProgressiveTarget target;
    target.angle_deg = j["angle"].get<double>();
    if (j.contains("axis")) target.axis = vec3_from_json(j["axis"]);
    if (j.contains("pivot")) target.pivot = vec_from_json(j["pivot"], dim);
    if (j.contains("translation")) target.translation = vec_from_json(j["translation"], dim);
    if (dim == 2) target.axis = Vec3::UnitZ();
    pose.transform = HandleTransform::from_matrix(target.at(1.0));
    pose.target = target;
  } else {
    parse_fail("pose needs \"matrix\", \"quaternion\" or \"angle\"");
  }
  return pose;
}

std::vector<PoseSpec> parse_poses(const Json& j, int dim) {
  const Json* list = &j;
  if (j.is_object() && j.contains("poses")) list = &j["poses"];
  if (!list->is_array()) parse_fail("poses must be a JSON list");
  std::vector<PoseSpec> out;
  for (const Json& p : *list) out.push_back(parse_pose(p, dim));
  return out;
}

ProgressiveTarget target_from_pose(const PoseSpec& pose) {
  if (pose.target) return *pose.target;
  const auto& rigid = pose.transform.rigid();
  if (!rigid) {
    throw Error(ErrorCode::NonRigid, "progressive deformation needs rigid poses (handle " +
                                         std::to_string(pose.handle) + ")");
  }
  const Eigen::AngleAxisd aa(rigid->rotation);
  ProgressiveTarget target;
  target.axis = aa.angle() == 0.0 ? Vec3(Vec3::UnitZ()) : Vec3(aa.axis());
  target.angle_deg = aa.angle() * 180.0 / M_PI;
  target.translation = rigid->translation;
  return target;
}

Json trace_to_json(const InsertionTrace& trace) {
  Json steps = Json::array();
  for (const InsertionStep& s : trace.steps) {
    steps.push_back({{"handle", s.handle}, {"inserted_index", s.inserted_index}, {"score", s.score}});
  }
  return steps;
}

std::vector<std::size_t> trace_insertions_from_json(const Json& j) {
  if (!j.is_array()) parse_fail("trace must be a JSON list");
  std::vector<std::size_t> out;
  for (const Json& s : j) out.push_back(s.at("inserted_index").get<std::size_t>());
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << j.dump() << '\n';
}

}  // namespace mfd
