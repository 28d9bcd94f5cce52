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

// First- and second-order rolling contact kinematics between an object and a
// hand, both described by orthogonal surface charts.
//
// Frames: {s} space, {h} hand, {o} object, {c_h}/{c_o} the Gauss frames at
// the contact point on each body. The contact frames share an origin, have
// opposite normals, and their x-axes differ by the spin angle psi. The
// relative twist V_rel = (omega_rel, v_rel) of the object with respect to the
// hand is expressed in {c_h}; rolling sets v_rel = 0.
//
// The relative acceleration (alpha, a) is the derivative of V_rel as seen in
// the hand frame, expressed in {c_h}.

#ifndef ROLLING_CONTACT_HPP_
#define ROLLING_CONTACT_HPP_

#include <cmath>
#include <numbers>

#include "rolling/errors.hpp"
#include "rolling/geom3d.hpp"
#include "rolling/surface.hpp"

namespace rolling {

using Mat53 = Eigen::Matrix<double, 5, 3>;
using Mat56 = Eigen::Matrix<double, 5, 6>;

// q = (u_o, v_o, u_h, v_h, psi).
struct ContactConfig {
  Vec2 u_o = Vec2::Zero();
  Vec2 u_h = Vec2::Zero();
  double psi = 0.0;

  static ContactConfig from_vector(const Vec5& q) {
    return {q.head<2>(), q.segment<2>(2), q(4)};
  }
  Vec5 to_vector() const {
    Vec5 q;
    q << u_o, u_h, psi;
    return q;
  }
};

// q_dot = (u_o', v_o', u_h', v_h', psi').
using ContactRates = Vec5;

struct ContactPair {
  ChartPtr object;
  ChartPtr hand;
};

// E1 = [[0, -1], [1, 0]].
inline Mat2 e1_matrix() {
  Mat2 e;
  e << 0.0, -1.0, 1.0, 0.0;
  return e;
}

// R_psi = [[cos, -sin], [-sin, -cos]]: the in-plane block of R_{c_h c_o}.
inline Mat2 spin_matrix(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat2 r;
  r << c, -s, -s, -c;
  return r;
}

inline Rotation contact_rotation(double psi) {
  Rotation r = Rotation::Zero();
  r.topLeftCorner<2, 2>() = spin_matrix(psi);
  r(2, 2) = -1.0;
  return r;
}

inline constexpr double kRelativeCurvatureLimit = 1e9;
inline constexpr double kConsistencyTolerance = 1e-6;

// Local geometry of both bodies at one contact configuration.
struct ContactGeometry {
  LocalGeometry o;
  LocalGeometry h;
  double psi = 0.0;
  Mat2 R_psi;
  Mat2 H_tilde_o;  // R_psi H_o R_psi
  Mat2 H_rel_inv;  // (H_tilde_o + H_h)^-1
};

inline ContactGeometry contact_geometry(const ContactPair& pair, const ContactConfig& q) {
  ContactGeometry g;
  g.o = local_geometry(*pair.object, q.u_o);
  g.h = local_geometry(*pair.hand, q.u_h);
  g.psi = q.psi;
  g.R_psi = spin_matrix(q.psi);
  g.H_tilde_o = g.R_psi * g.o.H * g.R_psi;
  const Mat2 rel = g.H_tilde_o + g.h.H;
  const double det = rel.determinant();
  g.H_rel_inv = rel.inverse();
  if (!(std::abs(det) > 0.0) || !g.H_rel_inv.allFinite() ||
      g.H_rel_inv.norm() > kRelativeCurvatureLimit) {
    throw SingularGeometryError("relative curvature H_tilde_o + H_h is singular");
  }
  return g;
}

// q_dot = K1 omega_rel.
inline Mat53 k1(const ContactGeometry& g) {
  const Mat2 e1 = e1_matrix();
  const Mat2 k1o = g.o.sqrtG_inv * g.R_psi * g.H_rel_inv * e1;
  const Mat2 k1h = g.h.sqrtG_inv * g.H_rel_inv * e1;
  Mat53 k = Mat53::Zero();
  k.block<2, 2>(0, 0) = k1o;
  k.block<2, 2>(2, 0) = k1h;
  k.block<1, 2>(4, 0) = g.o.sigma * g.o.gamma * k1o + g.h.sigma * g.h.gamma * k1h;
  k(4, 2) = -1.0;
  return k;
}

inline Mat53 k1(const ContactPair& pair, const ContactConfig& q) {
  return k1(contact_geometry(pair, q));
}

inline ContactRates first_order_qdot(const ContactGeometry& g, const Vec3& omega_rel) {
  return k1(g) * omega_rel;
}

inline ContactRates first_order_qdot(const ContactPair& pair, const ContactConfig& q,
                                     const Vec3& omega_rel) {
  return first_order_qdot(contact_geometry(pair, q), omega_rel);
}

struct OmegaRecovery {
  Vec3 omega;
  // |K1h omega_xy - u_h'|: violation of the rolling consistency constraint.
  double residual = 0.0;
};

// Inverts the object rows of K1 for (omega_x, omega_y) and reads omega_z from
// the psi row.
inline OmegaRecovery recover_omega(const ContactGeometry& g, const ContactRates& qd) {
  const Mat2 e1 = e1_matrix();
  const Vec2 ud_o = qd.head<2>(), ud_h = qd.segment<2>(2);
  const Mat2 rel = g.H_tilde_o + g.h.H;
  const Vec2 wxy = -e1 * rel * g.R_psi * g.o.sqrtG * ud_o;
  OmegaRecovery out;
  out.omega.head<2>() = wxy;
  out.omega(2) = g.o.sigma * g.o.gamma.dot(ud_o) + g.h.sigma * g.h.gamma.dot(ud_h) - qd(4);
  out.residual = (g.h.sqrtG_inv * g.H_rel_inv * e1 * wxy - ud_h).norm();
  return out;
}

// Relative angular velocity implied by q_dot; rejects inconsistent rates.
inline Vec3 omega_from_qdot(const ContactGeometry& g, const ContactRates& qd,
                            double tol = kConsistencyTolerance) {
  const OmegaRecovery r = recover_omega(g, qd);
  if (!(r.residual <= tol)) {
    throw ConstraintError("contact rates violate the rolling consistency constraint");
  }
  return r.omega;
}

// Least-squares projection of q_dot onto the range of K1.
struct QdotProjection {
  ContactRates qdot;
  Vec3 omega;
  double correction = 0.0;
};

inline QdotProjection project_qdot(const ContactGeometry& g, const ContactRates& qd) {
  const Mat53 k = k1(g);
  QdotProjection p;
  p.omega = k.colPivHouseholderQr().solve(qd);
  p.qdot = k * p.omega;
  p.correction = (p.qdot - qd).norm();
  return p;
}

struct ContactFrames {
  Transform T_sh;
  Transform T_so;
  Transform T_oh;
  Transform T_ho;
  Transform T_h_ch;   // Gauss frame on the hand
  Transform T_o_co;   // Gauss frame on the object
  Transform T_o_ch;
  Transform T_ch_o;
  Mat2 R_psi;
  Vec3 r_h_ph;  // contact point in {h}
  Vec3 r_o_po;  // contact point in {o}
};

inline ContactFrames contact_frames(const Transform& hand_pose, const ContactGeometry& g) {
  ContactFrames f;
  f.T_sh = hand_pose;
  f.T_h_ch = {g.h.gauss, g.h.point};
  f.T_o_co = {g.o.gauss, g.o.point};
  const Transform T_ch_co{contact_rotation(g.psi), Vec3::Zero()};
  f.T_o_ch = f.T_o_co * T_ch_co.inverse();
  f.T_ch_o = f.T_o_ch.inverse();
  f.T_ho = f.T_h_ch * f.T_ch_o;
  f.T_oh = f.T_ho.inverse();
  f.T_so = f.T_sh * f.T_ho;
  f.R_psi = g.R_psi;
  f.r_h_ph = g.h.point;
  f.r_o_po = g.o.point;
  return f;
}

inline ContactFrames contact_frames(const Transform& hand_pose, const ContactConfig& q,
                                    const ContactPair& pair) {
  return contact_frames(hand_pose, contact_geometry(pair, q));
}

// V_o = Ad(T_oh) V_h + Ad(T_o_ch) V_rel, all body twists.
inline Twist object_twist(const ContactFrames& f, const Twist& hand_twist, const Twist& rel_twist) {
  return adjoint(f.T_oh) * hand_twist + adjoint(f.T_o_ch) * rel_twist;
}

// Rolling acceleration a_roll = -omega_rel x (R_psi sqrt(G_o) u_o', 0): the
// relative linear acceleration needed to keep the contact velocity zero.
inline Vec3 rolling_accel(const ContactGeometry& g, const ContactRates& qd, const Vec3& w) {
  const Vec2 z = g.R_psi * g.o.sqrtG * qd.head<2>();
  const Vec2 xy = -w(2) * e1_matrix() * z;
  return Vec3(xy(0), xy(1), w(1) * z(0) - w(0) * z(1));
}

inline Vec3 rolling_accel_constraint(const ContactGeometry& g, const ContactRates& qd) {
  return rolling_accel(g, qd, omega_from_qdot(g, qd));
}

// alpha_z keeping omega_z identically zero in pure rolling:
//   -(w_y, -w_x) R_psi E1 sqrt(G_o)^-1 L_o u_o'.
inline double pure_rolling_alpha_z_unchecked(const ContactGeometry& g, const ContactRates& qd,
                                             const Vec3& w) {
  const Vec2 wp(w(1), -w(0));
  return -wp.dot(g.R_psi * e1_matrix() * g.o.sqrtG_inv * g.o.L * qd.head<2>());
}

inline constexpr double kPureRollingSpinTolerance = 1e-8;

inline double pure_rolling_alpha_z(const ContactGeometry& g, const ContactRates& qd) {
  const Vec3 w = omega_from_qdot(g, qd);
  if (std::abs(w(2)) > kPureRollingSpinTolerance) {
    throw ConstraintError("pure_rolling_alpha_z: state has nonzero relative spin");
  }
  return pure_rolling_alpha_z_unchecked(g, qd, w);
}

// q_ddot = drift + K3 (alpha, a).
struct SecondOrderTerms {
  Vec5 drift;
  Mat56 K3;
};

inline SecondOrderTerms second_order_terms(const ContactGeometry& g, const ContactRates& qd,
                                           const Vec3& w) {
  const Mat2 e1 = e1_matrix();
  const Mat2& Rp = g.R_psi;
  const LocalGeometry& o = g.o;
  const LocalGeometry& h = g.h;
  const Vec2 ud_o = qd.head<2>(), ud_h = qd.segment<2>(2);
  const double psid = qd(4);
  const Eigen::Vector3d w_o(ud_o(0) * ud_o(0), ud_o(0) * ud_o(1), ud_o(1) * ud_o(1));
  const Eigen::Vector3d w_h(ud_h(0) * ud_h(0), ud_h(0) * ud_h(1), ud_h(1) * ud_h(1));

  Eigen::Matrix4d M;
  M << Rp * o.sqrtG, -h.sqrtG,  //
      Rp * e1 * o.H * o.sqrtG, -e1 * h.H * h.sqrtG;
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
  if (!lu.isInvertible()) {
    throw SingularGeometryError("second-order kinematics matrix is singular");
  }

  Eigen::Vector4d rhs;
  rhs.head<2>() = -Rp * o.sqrtG * o.gamma_bar * w_o + h.sqrtG * h.gamma_bar * w_h -
                  2.0 * w(2) * e1 * Rp * o.sqrtG * ud_o;
  rhs.tail<2>() = Rp * e1 * o.sqrtG_inv * o.L_bbar * w_o - e1 * h.sqrtG_inv * h.L_bbar * w_h -
                  w(2) * Rp * o.H * o.sqrtG * ud_o - psid * h.H * h.sqrtG * ud_h -
                  o.sigma * o.gamma.dot(ud_o) * Vec2(w(1), -w(0));
  const Eigen::Vector4d udd = lu.solve(rhs);

  SecondOrderTerms t;
  t.drift.head<4>() = udd;
  const Vec2 wp(w(1), -w(0));
  t.drift(4) = -wp.dot(Rp * e1 * o.sqrtG_inv * o.L * ud_o) +
               o.sigma * (o.gamma.dot(udd.head<2>()) + o.gamma_bbar.dot(w_o)) +
               h.sigma * (h.gamma.dot(udd.tail<2>()) + h.gamma_bbar.dot(w_h));

  // (alpha, a) enters the right-hand side as (-a_x, -a_y, alpha_x, alpha_y).
  Eigen::Matrix<double, 4, 6> e2 = Eigen::Matrix<double, 4, 6>::Zero();
  e2(0, 3) = -1.0;
  e2(1, 4) = -1.0;
  e2(2, 0) = 1.0;
  e2(3, 1) = 1.0;
  const Eigen::Matrix<double, 4, 6> k3a = lu.solve(e2);
  t.K3.topRows<4>() = k3a;
  t.K3.row(4) = o.sigma * o.gamma * k3a.topRows<2>() + h.sigma * h.gamma * k3a.bottomRows<2>();
  t.K3(4, 2) -= 1.0;
  return t;
}

// dV_rel = (alpha, a) in {c_h}.
inline Vec5 second_order_qddot(const ContactGeometry& g, const ContactRates& qd,
                               const Vec6& dV_rel) {
  const SecondOrderTerms t = second_order_terms(g, qd, omega_from_qdot(g, qd));
  return t.drift + t.K3 * dV_rel;
}

// Velocity-product terms of the object body acceleration:
//   dV_o = Ad(T_oh) dV_h + Ad(T_o_ch) dV_rel + K4.
inline Vec6 k4(const ContactFrames& f, const Twist& hand_twist, const Vec3& omega_rel) {
  const Twist V_o = object_twist(f, hand_twist, stack(omega_rel, Vec3::Zero()));
  const Vec3 w_o = angular(V_o), v_o = linear(V_o);
  const Vec3 w_h = angular(hand_twist), v_h = linear(hand_twist);
  const Vec3 w_h_ch = f.T_h_ch.rotation.transpose() * w_h;
  const Vec3 ang = f.T_o_ch.rotation * w_h_ch.cross(omega_rel);
  const Vec3& r_hp = f.r_h_ph;
  const Vec3& r_op = f.r_o_po;
  const Vec3 lin = f.T_oh.rotation * (w_h.cross(v_h) + w_h.cross(w_h.cross(r_hp))) -
                   w_o.cross(v_o) + r_op.cross(ang) - w_o.cross(w_o.cross(r_op));
  return stack(ang, lin);
}

inline Vec6 object_accel(const ContactFrames& f, const Twist& hand_twist, const Vec6& hand_accel,
                         const Vec3& omega_rel, const Vec6& dV_rel) {
  return adjoint(f.T_oh) * hand_accel + adjoint(f.T_o_ch) * dV_rel + k4(f, hand_twist, omega_rel);
}

}  // namespace rolling

#endif  // ROLLING_CONTACT_HPP_
