#pragma once

#include <array>

#include <Eigen/Core>

#include "erpmotion/geometry.hpp"

namespace erpm {

// Element of SO(3). Construction validates orthonormality and det = +1 to
// kRotationTolerance; use Rotation::nearest to project an arbitrary matrix.
class Rotation {
 public:
  static constexpr double kRotationTolerance = 1e-9;

  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation identity() { return Rotation(); }

  // Polar projection onto SO(3) (closest rotation in Frobenius norm).
  static Rotation nearest(const Eigen::Matrix3d& m);

  // Unit quaternion (w, x, y, z); normalized before conversion.
  static Rotation from_quaternion(const std::array<double, 4>& wxyz);
  std::array<double, 4> quaternion() const;

  // Right-handed rotation by angle_deg about the (normalized) axis.
  static Rotation from_axis_angle(const Eigen::Vector3d& axis, double angle_deg);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Rotation transpose() const;
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation& other) const;
  SphereDir operator*(const SphereDir& d) const { return m_ * d; }

  // Geodesic angle from the identity, degrees.
  double angle_deg() const;

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}

  Eigen::Matrix3d m_;
};

// M = R_y(yaw) * R_x(pitch) * R_z(roll), all right-handed, angles in degrees.
// This composition order is the toolkit-wide Euler convention.
Rotation rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg);

// arccos((trace(Ra^T Rb) - 1) / 2) in degrees, argument clamped to [-1, 1].
double geodesic_distance(const Rotation& a, const Rotation& b);

}  // namespace erpm
