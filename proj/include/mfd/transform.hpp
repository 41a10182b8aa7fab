#pragma once

#include <optional>

#include "mfd/types.hpp"

namespace mfd {

struct RigidMotion {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();
};

// Splits a homogeneous matrix into (unit quaternion, translation). Succeeds
// iff the linear part is orthogonal with determinant +1 within 1e-8; the
// quaternion is returned with w >= 0. Throws NonRigid otherwise.
RigidMotion rigid_decompose(const Mat4& matrix);

Mat4 compose(const RigidMotion& motion);

// 2D homogeneous 3x3 matrix embedded as a 4x4 acting on the z = 0 plane.
Mat4 embed_planar(const Eigen::Matrix3d& planar);

// Affine handle transform. Planar rotations are quaternions about z, so the
// same representation serves 2D and 3D domains.
class HandleTransform {
 public:
  HandleTransform() = default;

  // Keeps the matrix verbatim and records its rigid decomposition if any.
  static HandleTransform from_matrix(const Mat4& matrix);
  static HandleTransform from_rigid(const RigidMotion& motion);

  const Mat4& matrix() const noexcept { return matrix_; }
  const std::optional<RigidMotion>& rigid() const noexcept { return rigid_; }

  Vec3 apply(const Vec3& p) const {
    return matrix_.topLeftCorner<3, 3>() * p + matrix_.topRightCorner<3, 1>();
  }

 private:
  Mat4 matrix_ = Mat4::Identity();
  std::optional<RigidMotion> rigid_ = RigidMotion{};
};

}  // namespace mfd
