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

// Closed-form reference motions and numerical-differentiation helpers.
//
// The turntable formulas hold for a homogeneous solid sphere (J = 2/5 m r^2)
// rolling without slipping on a plate spinning at constant rate.

#ifndef ROLLING_ORACLES_HPP_
#define ROLLING_ORACLES_HPP_

#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "rolling/dynamics.hpp"
#include "rolling/errors.hpp"
#include "rolling/geom3d.hpp"

namespace rolling {

struct TurntableOrbit {
  double omega_c = 0.0;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// contact0: initial contact point; v0: initial velocity of the ball center.
inline TurntableOrbit horizontal_orbit(double omega_plate, const Vec3& contact0, const Vec3& v0) {
  if (omega_plate == 0.0 || !std::isfinite(omega_plate)) {
    throw ParameterError("horizontal_orbit: plate rate must be nonzero");
  }
  TurntableOrbit o;
  o.omega_c = 2.0 / 7.0 * omega_plate;
  o.center = contact0 - v0.cross(Vec3(0.0, 0.0, 1.0 / o.omega_c));
  o.radius = (contact0 - o.center).norm();
  return o;
}

inline void require_solid_sphere(const ObjectModel& m, double radius, double tol = 1e-9) {
  const double j = 0.4 * m.mass * radius * radius;
  if ((m.inertia.array() - j).abs().maxCoeff() > tol * j) {
    throw ParameterError("turntable oracle requires a homogeneous solid sphere (J = 2/5 m r^2)");
  }
}

inline TurntableOrbit horizontal_orbit(const ObjectModel& ball, double radius, double omega_plate,
                                       const Vec3& contact0, const Vec3& v0) {
  require_solid_sphere(ball, radius);
  return horizontal_orbit(omega_plate, contact0, v0);
}

// Drift speed of the orbit center on a plate tilted by theta.
inline double tilted_drift(double omega_plate, double theta, double g) {
  if (omega_plate == 0.0 || !std::isfinite(omega_plate)) {
    throw ParameterError("tilted_drift: plate rate must be nonzero");
  }
  return 2.5 * (g / omega_plate) * std::sin(theta);
}

// Central-difference Jacobian of f at x0.
inline MatX finite_difference_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x0,
                                       double step) {
  auto call = [&](const VecX& x) {
    try {
      return f(x);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("finite_difference_jacobian: ") + e.what());
    }
  };
  const VecX f0 = call(x0);
  MatX J(f0.size(), x0.size());
  VecX x = x0;
  for (Eigen::Index j = 0; j < x0.size(); ++j) {
    x(j) = x0(j) + step;
    const VecX fp = call(x);
    x(j) = x0(j) - step;
    const VecX fm = call(x);
    x(j) = x0(j);
    J.col(j) = (fp - fm) / (2.0 * step);
  }
  return J;
}

// Contact point on the hand, in space coordinates.
inline Vec3 contact_point_space(const RollingSystem& sys, const StateVector& s) {
  const RollingState rs = RollingState::from_vector(s);
  return rs.hand_pose().apply(sys.hand->derivatives(rs.q.u_h).f);
}

struct CircleFit {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double rms = 0.0;
};

// Algebraic least-squares circle followed by Gauss-Newton on the geometric
// distance.
inline CircleFit fit_circle(const std::vector<Vec2>& pts) {
  if (pts.size() < 3) throw ParameterError("fit_circle: need at least three points");
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  MatX A(n, 3);
  VecX b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = pts[i](0);
    A(i, 1) = pts[i](1);
    A(i, 2) = 1.0;
    b(i) = -pts[i].squaredNorm();
  }
  const Eigen::Vector3d d = A.colPivHouseholderQr().solve(b);
  CircleFit c;
  c.center = Vec2(-0.5 * d(0), -0.5 * d(1));
  c.radius = std::sqrt(std::max(0.0, c.center.squaredNorm() - d(2)));
  for (int it = 0; it < 20; ++it) {
    MatX J(n, 3);
    VecX r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec2 dv = pts[i] - c.center;
      const double dist = dv.norm();
      r(i) = dist - c.radius;
      J.row(i) << -dv(0) / dist, -dv(1) / dist, -1.0;
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-r);
    c.center += step.head<2>();
    c.radius += step(2);
    if (step.norm() < 1e-15) break;
  }
  double acc = 0.0;
  for (const Vec2& p : pts) acc += std::pow((p - c.center).norm() - c.radius, 2);
  c.rms = std::sqrt(acc / double(n));
  return c;
}

struct DriftFit {
  double offset = 0.0;
  double velocity = 0.0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

// Least-squares fit x(t) = offset + velocity t + A cos(w t) + B sin(w t).
inline DriftFit fit_drift(const std::vector<double>& t, const std::vector<double>& x, double w) {
  if (t.size() != x.size() || t.size() < 4) throw ParameterError("fit_drift: bad sample arrays");
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  MatX A(n, 4);
  VecX b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A.row(i) << 1.0, t[i], std::cos(w * t[i]), std::sin(w * t[i]);
    b(i) = x[i];
  }
  const Eigen::Vector4d c = A.colPivHouseholderQr().solve(b);
  return {c(0), c(1), c(2), c(3)};
}

// Initial state of a ball on a plate spinning at omega_plate about its normal,
// with the ball center moving at ball_velocity (plate coordinates, z = 0) and
// the contact at the plate origin. The plate (hand) frame is tilted about the
// space x-axis by `tilt`.
inline RollingState turntable_state(double radius, double omega_plate, const Vec2& ball_velocity,
                                    double tilt = 0.0) {
  RollingState s;
  s.rpy = {tilt, 0.0, 0.0};
  s.q = {Vec2(std::acos(0.0), 0.0), Vec2::Zero(), 0.0};
  s.V_h = stack(Vec3(0.0, 0.0, omega_plate), Vec3::Zero());
  // Relative rotation about the contact point, v_center = omega_rel x (0, 0, r),
  // with the relative spin cancelling the plate spin.
  const Vec3 w_rel(-ball_velocity(1) / radius, ball_velocity(0) / radius, -omega_plate);
  const ContactGeometry g =
      contact_geometry({make_sphere(radius), make_plane()}, s.q);
  s.qdot = first_order_qdot(g, w_rel);
  return s;
}

}  // namespace rolling

#endif  // ROLLING_ORACLES_HPP_
