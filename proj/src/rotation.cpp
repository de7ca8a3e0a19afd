#include "erpmotion/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <Eigen/LU>

#include "erpmotion/error.hpp"

namespace erpm {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
  if (!m.allFinite()) throw DomainError("rotation matrix has non-finite entries");
  const Eigen::Matrix3d gram = m.transpose() * m - Eigen::Matrix3d::Identity();
  if (gram.cwiseAbs().maxCoeff() > kRotationTolerance) throw DomainError("rotation matrix is not orthonormal");
  if (std::abs(m.determinant() - 1.0) > kRotationTolerance) throw DomainError("rotation matrix determinant is not +1");
}

Rotation Rotation::nearest(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw DomainError("rotation matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return Rotation(svd.matrixU() * d * svd.matrixV().transpose(), Unchecked{});
}

Rotation Rotation::from_quaternion(const std::array<double, 4>& wxyz) {
  Eigen::Quaterniond q(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  const double n = q.norm();
  if (!std::isfinite(n) || n < 1e-12) throw DomainError("quaternion has zero or non-finite norm");
  q.normalize();
  return nearest(q.toRotationMatrix());
}

std::array<double, 4> Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  // Canonical hemisphere so that serialization is unique.
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

Rotation Rotation::from_axis_angle(const Eigen::Vector3d& axis, double angle_deg) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle_deg)) throw DomainError("axis-angle needs a non-zero axis and finite angle");
  return nearest(Eigen::AngleAxisd(angle_deg * kDegToRad, axis / n).toRotationMatrix());
}

Rotation Rotation::transpose() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation Rotation::operator*(const Rotation& other) const { return Rotation(m_ * other.m_, Unchecked{}); }

double Rotation::angle_deg() const { return geodesic_distance(Rotation(), *this); }

Rotation rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
  const double y = yaw_deg * kDegToRad;
  const double p = pitch_deg * kDegToRad;
  const double r = roll_deg * kDegToRad;
  Eigen::Matrix3d ry;
  ry << std::cos(y), 0, std::sin(y), 0, 1, 0, -std::sin(y), 0, std::cos(y);
  Eigen::Matrix3d rx;
  rx << 1, 0, 0, 0, std::cos(p), -std::sin(p), 0, std::sin(p), std::cos(p);
  Eigen::Matrix3d rz;
  rz << std::cos(r), -std::sin(r), 0, std::sin(r), std::cos(r), 0, 0, 0, 1;
  return Rotation(ry * rx * rz);
}

double geodesic_distance(const Rotation& a, const Rotation& b) {
  // Same angle as arccos((tr - 1) / 2) with the cosine clamped, but evaluated
  // through atan2 so that angles near zero keep full precision.
  const Eigen::Matrix3d m = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis_sin(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = std::min(0.5 * axis_sin.norm(), 1.0);
  return std::atan2(s, c) / kDegToRad;
}

}  // namespace erpm
