#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mfd {

// Positions are always stored with three components; 2D domains keep z = 0.
using Vec3 = Eigen::Vector3d;
using Mat4 = Eigen::Matrix4d;

using HandleId = int;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Two positions closer than this are the same sample.
inline constexpr double kCoincidenceTolerance = 1e-12;

}  // namespace mfd
