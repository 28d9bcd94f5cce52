// Copyright 2026 The Rolling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Rigid-body math: rotations, transforms, twists, wrenches and adjoints.
//
// All six-vectors are stacked angular-before-linear: a twist is (w, v) and a
// wrench is (torque, force).

#ifndef ROLLING_GEOM3D_HPP_
#define ROLLING_GEOM3D_HPP_

#include <cmath>

#include <Eigen/Dense>

#include "rolling/errors.hpp"

namespace rolling {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// A 3x3 proper orthonormal matrix.
using Rotation = Mat3;
// (w, v): angular velocity first, then linear velocity.
using Twist = Vec6;
// (torque, force).
using Wrench = Vec6;

inline Vec3 angular(const Vec6& x) { return x.head<3>(); }
inline Vec3 linear(const Vec6& x) { return x.tail<3>(); }

inline Vec6 stack(const Vec3& top, const Vec3& bottom) {
  Vec6 out;
  out << top, bottom;
  return out;
}

// x-y-z extrinsic roll-pitch-yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
struct EulerRPY {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  static EulerRPY from_vector(const Vec3& v) { return {v(0), v(1), v(2)}; }
  Vec3 to_vector() const { return Vec3(roll, pitch, yaw); }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v(2), v(1),  //
      v(2), 0.0, -v(0),   //
      -v(1), v(0), 0.0;
  return m;
}

inline Rotation rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

inline Rotation rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

inline Rotation rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

inline bool is_rotation(const Mat3& r, double tol = 1e-12) {
  return (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

inline Rotation rotation_from_rpy(const EulerRPY& rpy) {
  return rot_z(rpy.yaw) * rot_y(rpy.pitch) * rot_x(rpy.roll);
}

// Distance from the pitch singularity at which extraction is refused.
inline constexpr double kGimbalMargin = 1e-6;

inline EulerRPY rpy_from_rotation(const Rotation& r) {
  const double sp = -r(2, 0);
  const double cp = std::hypot(r(0, 0), r(1, 0));
  if (cp < std::sin(kGimbalMargin)) {
    throw GimbalError("rpy_from_rotation: pitch at +-pi/2, roll/yaw degenerate");
  }
  EulerRPY out;
  out.pitch = std::atan2(sp, cp);
  out.roll = std::atan2(r(2, 1), r(2, 2));
  out.yaw = std::atan2(r(1, 0), r(0, 0));
  return out;
}

// Maps a body-frame angular velocity to roll-pitch-yaw rates.
inline Vec3 rpy_rates_from_body_omega(const EulerRPY& rpy, const Vec3& w) {
  const double cp = std::cos(rpy.pitch);
  if (std::abs(cp) < std::sin(kGimbalMargin)) {
    throw GimbalError("rpy rate map singular at pitch = +-pi/2");
  }
  const double sr = std::sin(rpy.roll), cr = std::cos(rpy.roll);
  const double tp = std::sin(rpy.pitch) / cp;
  return Vec3(w(0) + sr * tp * w(1) + cr * tp * w(2),  //
              cr * w(1) - sr * w(2),                   //
              (sr * w(1) + cr * w(2)) / cp);
}

// Element of SE(3) stored as (R, p).
struct Transform {
  Rotation rotation = Rotation::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& p) {
    return {Rotation::Identity(), p};
  }

  Transform operator*(const Transform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  Vec3 apply(const Vec3& point) const { return rotation * point + translation; }
  Transform inverse() const {
    const Rotation rt = rotation.transpose();
    return {rt, -rt * translation};
  }
  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

// [Ad_T] = [[R, 0], [[p] R, R]].
inline Mat6 adjoint(const Transform& t) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = t.rotation;
  ad.bottomRightCorner<3, 3>() = t.rotation;
  ad.bottomLeftCorner<3, 3>() = skew(t.translation) * t.rotation;
  return ad;
}

// [ad_V] = [[w], 0], [[v], [w]]; [ad_V1] V2 is the Lie bracket.
inline Mat6 lie_ad(const Twist& v) {
  Mat6 ad = Mat6::Zero();
  const Mat3 w = skew(angular(v));
  ad.topLeftCorner<3, 3>() = w;
  ad.bottomRightCorner<3, 3>() = w;
  ad.bottomLeftCorner<3, 3>() = skew(linear(v));
  return ad;
}

// Derivative of `v` as seen from frame A, given its derivative `a` as seen
// from frame B and the angular velocity `frame_omega` of B relative to A. All
// three vectors share one set of coordinates.
inline Vec3 cross_frame_derivative(const Vec3& v, const Vec3& a,
                                   const Vec3& frame_omega) {
  return a + frame_omega.cross(v);
}

}  // namespace rolling

#endif  // ROLLING_GEOM3D_HPP_
