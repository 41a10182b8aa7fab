#include "mfd/transform.hpp"

#include <cmath>

#include "mfd/error.hpp"

namespace mfd {
namespace {

constexpr double kRigidTolerance = 1e-8;

}  // namespace

RigidMotion rigid_decompose(const Mat4& matrix) {
  if (!matrix.allFinite()) throw Error(ErrorCode::NonRigid, "transform is not finite");
  const Eigen::RowVector4d bottom = matrix.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRigidTolerance) {
    throw Error(ErrorCode::NonRigid, "transform is not affine");
  }
  const Eigen::Matrix3d linear = matrix.topLeftCorner<3, 3>();
  const double orthogonality = (linear.transpose() * linear - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orthogonality > kRigidTolerance || std::abs(linear.determinant() - 1.0) > kRigidTolerance) {
    throw Error(ErrorCode::NonRigid, "linear part is not a rotation");
  }
  RigidMotion motion;
  motion.rotation = Eigen::Quaterniond(linear).normalized();
  if (motion.rotation.w() < 0.0) motion.rotation.coeffs() *= -1.0;
  motion.translation = matrix.topRightCorner<3, 1>();
  return motion;
}

Mat4 compose(const RigidMotion& motion) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = motion.rotation.normalized().toRotationMatrix();
  m.topRightCorner<3, 1>() = motion.translation;
  return m;
}

Mat4 embed_planar(const Eigen::Matrix3d& planar) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<2, 2>() = planar.topLeftCorner<2, 2>();
  m.topRightCorner<2, 1>() = planar.topRightCorner<2, 1>();
  m(3, 0) = planar(2, 0);
  m(3, 1) = planar(2, 1);
  m(3, 3) = planar(2, 2);
  return m;
}

HandleTransform HandleTransform::from_matrix(const Mat4& matrix) {
  HandleTransform t;
  t.matrix_ = matrix;
  try {
    t.rigid_ = rigid_decompose(matrix);
  } catch (const Error&) {
    t.rigid_.reset();
  }
  return t;
}

HandleTransform HandleTransform::from_rigid(const RigidMotion& motion) {
  HandleTransform t;
  t.rigid_ = motion;
  t.rigid_->rotation.normalize();
  t.matrix_ = compose(*t.rigid_);
  return t;
}

}  // namespace mfd
