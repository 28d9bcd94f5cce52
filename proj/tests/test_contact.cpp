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

#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "rolling/contact.hpp"
#include "support/fixtures.hpp"
#include "support/random.hpp"

namespace rolling {
namespace {

using std::numbers::pi;
using testing::NamedPair;
using testing::Rng;

const ContactConfig kTurntableStart{Vec2(pi / 2, 0.0), Vec2::Zero(), 0.0};

// Relative rotation of the object about the contact point: omega_rel is held
// fixed in hand coordinates, so omega_rel(t) in {c_h} is R_{c_h h}(q) w_hand.
Vec5 propagate_rate(const ContactPair& pair, const Vec5& q, const Vec3& w_hand) {
  const ContactGeometry g = contact_geometry(pair, ContactConfig::from_vector(q));
  return first_order_qdot(g, g.h.gauss.transpose() * w_hand);
}

// One classical RK4 step of q' = K1(q) R_{c_h h}(q) w_hand(t).
Vec5 rk4_step(const ContactPair& pair, const Vec5& q, double t, double h,
              const std::function<Vec3(double)>& w_hand) {
  const Vec5 k1v = propagate_rate(pair, q, w_hand(t));
  const Vec5 k2v = propagate_rate(pair, q + 0.5 * h * k1v, w_hand(t + 0.5 * h));
  const Vec5 k3v = propagate_rate(pair, q + 0.5 * h * k2v, w_hand(t + 0.5 * h));
  const Vec5 k4v = propagate_rate(pair, q + h * k3v, w_hand(t + h));
  return q + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
}

TEST(ContactFrames, SphereOnPlaneCenterAboveContact) {
  const auto p = testing::sphere_on_plane();
  const ContactFrames f = contact_frames(Transform::identity(), kTurntableStart, p.pair);
  EXPECT_LE((f.T_so.translation - Vec3(0, 0, 0.2)).norm(), 1e-15);
  const Vec3 n_hand = f.T_sh.rotation * f.T_h_ch.rotation.col(2);
  const Vec3 n_obj = f.T_so.rotation * f.T_o_co.rotation.col(2);
  EXPECT_LE((n_hand - Vec3::UnitZ()).norm(), 1e-15);
  EXPECT_LE((n_hand + n_obj).norm(), 1e-15);
}

TEST(ContactFrames, OriginsCoincideAndNormalsOppose) {
  Rng rng(21);
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 30; ++i) {
      const Transform hand = rng.transform();
      const ContactConfig q = testing::random_config(rng, p);
      const ContactFrames f = contact_frames(hand, q, p.pair);
      const Transform s_ch = f.T_sh * f.T_h_ch;
      const Transform s_co = f.T_so * f.T_o_co;
      EXPECT_LE((s_ch.translation - s_co.translation).norm(), 1e-9) << p.name;
      EXPECT_LE((s_ch.rotation.col(2) + s_co.rotation.col(2)).norm(), 1e-9) << p.name;
      EXPECT_TRUE(is_rotation(f.T_so.rotation, 1e-12));
    }
  }
}

TEST(ContactFrames, SpinPerturbationRotatesXAxisByDelta) {
  Rng rng(22);
  const auto p = testing::sphere_on_ellipsoid();
  for (int i = 0; i < 20; ++i) {
    ContactConfig q = testing::random_config(rng, p);
    const double delta = rng.uniform(-0.5, 0.5);
    auto x_angle = [&](const ContactConfig& c) {
      const ContactFrames f = contact_frames(Transform::identity(), c, p.pair);
      // {c_h} x-axis seen from {c_o}.
      const Rotation co_ch = (f.T_o_co.inverse() * f.T_o_ch).rotation;
      return std::atan2(co_ch(1, 0), co_ch(0, 0));
    };
    const double a0 = x_angle(q);
    q.psi += delta;
    const double a1 = x_angle(q);
    EXPECT_NEAR(std::remainder(a0 - a1, 2 * pi), delta, 1e-10);
  }
}

TEST(K1, ZeroRelativeVelocityGivesZeroRates) {
  const auto p = testing::sphere_on_plane();
  EXPECT_EQ(first_order_qdot(p.pair, kTurntableStart, Vec3::Zero()), Vec5::Zero());
}

TEST(K1, TurntableInitialRates) {
  // K1's last row carries -omega_z, so a relative spin of -7 rad/s gives
  // psi' = +7 rad/s; the in-plane rates are (0, 1, 0, -0.2).
  const auto p = testing::sphere_on_plane();
  const Vec5 qd = first_order_qdot(p.pair, kTurntableStart, Vec3(1, 0, -7));
  Vec5 expected;
  expected << 0.0, 1.0, 0.0, -0.2, 7.0;
  EXPECT_LE((qd - expected).norm(), 1e-14);
}

TEST(K1, MatchesRigidContactPropagation) {
  // Object pose in {h} from contact_frames(q + dt q') versus the rigid rotation
  // of the object about the contact point at omega_rel.
  Rng rng(23);
  for (const NamedPair& p : {testing::sphere_on_ellipsoid(), testing::sphere_in_dish(),
                             testing::ellipsoid_in_dish()}) {
    for (int i = 0; i < 20; ++i) {
      const ContactConfig q = testing::random_config(rng, p);
      const ContactGeometry g = contact_geometry(p.pair, q);
      const Vec3 w = rng.vec3();
      const Vec5 qd = first_order_qdot(g, w);
      const double dt = 1e-6;
      auto pose = [&](double s) {
        return contact_frames(Transform::identity(), ContactConfig::from_vector(q.to_vector() + s * qd),
                              p.pair).T_ho;
      };
      const Transform f0 = pose(0.0), fp = pose(dt), fm = pose(-dt);
      const Mat3 dR = (fp.rotation - fm.rotation) / (2 * dt);
      const Vec3 dp = (fp.translation - fm.translation) / (2 * dt);
      const Rotation R_h_ch = g.h.gauss;
      const Vec3 w_h = R_h_ch * w;
      const Mat3 dR_rigid = skew(w_h) * f0.rotation;
      const Vec3 dp_rigid = w_h.cross(f0.translation - g.h.point);
      EXPECT_LE((dR - dR_rigid).cwiseAbs().maxCoeff(), 1e-4) << p.name;
      EXPECT_LE((dp - dp_rigid).norm(), 1e-4) << p.name;
    }
  }
}

TEST(K1, ConsistencyResidualVanishesOnRandomInputs) {
  Rng rng(24);
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 50; ++i) {
      const ContactGeometry g = contact_geometry(p.pair, testing::random_config(rng, p));
      const Vec3 w = rng.vec3(3.0);
      const OmegaRecovery r = recover_omega(g, first_order_qdot(g, w));
      EXPECT_LT(r.residual, 1e-10) << p.name;
      EXPECT_LE((r.omega - w).norm(), 1e-10 * (1 + w.norm())) << p.name;
    }
  }
}

TEST(K1, InconsistentRatesRejected) {
  const auto p = testing::sphere_on_plane();
  const ContactGeometry g = contact_geometry(p.pair, kTurntableStart);
  Vec5 qd = first_order_qdot(g, Vec3(1, 0, 0));
  qd(2) += 1e-3;
  EXPECT_THROW(omega_from_qdot(g, qd), ConstraintError);
  const QdotProjection proj = project_qdot(g, qd);
  EXPECT_LT(recover_omega(g, proj.qdot).residual, 1e-12);
  EXPECT_GT(proj.correction, 0.0);
}

TEST(K1, PlaneOnPlaneIsSingular) {
  const ContactPair pair{make_plane(), make_plane()};
  EXPECT_THROW(contact_geometry(pair, ContactConfig{}), SingularGeometryError);
}

TEST(K1, InvariantUnderFullTurnOfPsi) {
  Rng rng(25);
  const auto p = testing::ellipsoid_on_ellipsoid();
  for (int i = 0; i < 10; ++i) {
    ContactConfig q = testing::random_config(rng, p);
    const Mat53 a = k1(p.pair, q);
    q.psi += 2 * pi;
    EXPECT_LE((a - k1(p.pair, q)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ObjectTwist, ZeroInputsGiveZeroTwist) {
  const auto p = testing::sphere_on_plane();
  const ContactFrames f = contact_frames(Transform::identity(), kTurntableStart, p.pair);
  EXPECT_EQ(object_twist(f, Twist::Zero(), Twist::Zero()), Twist::Zero());
}

TEST(ObjectTwist, TurntableSpinCancels) {
  const auto p = testing::sphere_on_plane();
  const ContactFrames f = contact_frames(Transform::identity(), kTurntableStart, p.pair);
  const Twist hand = stack(Vec3(0, 0, 7), Vec3::Zero());
  const Twist v_o = object_twist(f, hand, stack(Vec3(1, 0, -7), Vec3::Zero()));
  const Vec3 w_space = f.T_so.rotation * angular(v_o);
  EXPECT_NEAR(w_space(2), 0.0, 1e-14);
  // Center moves at omega_o x (0, 0, 0.2) minus nothing: the contact point is
  // at rest on the plate origin.
  EXPECT_LE((f.T_so.rotation * linear(v_o) - Vec3(0, -0.2, 0)).norm(), 1e-14);
}

TEST(ObjectTwist, RigidAttachmentIsAdjointTransport) {
  Rng rng(26);
  const auto p = testing::sphere_in_dish();
  for (int i = 0; i < 20; ++i) {
    const ContactFrames f = contact_frames(rng.transform(), testing::random_config(rng, p), p.pair);
    const Twist vh = rng.vec6();
    EXPECT_LE((object_twist(f, vh, Twist::Zero()) - adjoint(f.T_oh) * vh).norm(), 1e-12);
  }
}

// Finite-difference check of q'' along q' = K1(q) R_{c_h h} w_hand(t).
struct SecondOrderCase {
  Vec5 q;
  Vec5 qd;
  Vec5 qdd_fd;
  Vec6 dv_rel;
};

SecondOrderCase second_order_case(const ContactPair& pair, const Vec5& q0, const Vec3& w0,
                                  const Vec3& w1) {
  auto w_hand = [&](double t) { return Vec3(w0 + t * w1); };
  const double dt = 1e-5;
  const Vec5 qp = rk4_step(pair, q0, 0.0, dt, w_hand);
  const Vec5 qm = rk4_step(pair, q0, 0.0, -dt, w_hand);
  SecondOrderCase c;
  c.q = q0;
  c.qd = propagate_rate(pair, q0, w_hand(0.0));
  c.qdd_fd = (propagate_rate(pair, qp, w_hand(dt)) - propagate_rate(pair, qm, w_hand(-dt))) / (2 * dt);
  const ContactGeometry g = contact_geometry(pair, ContactConfig::from_vector(q0));
  const Vec3 w = g.h.gauss.transpose() * w0;
  c.dv_rel << g.h.gauss.transpose() * w1, rolling_accel(g, c.qd, w);
  return c;
}

TEST(SecondOrder, ZeroVelocityAndAccelerationGiveZero) {
  const auto p = testing::sphere_on_ellipsoid();
  Rng rng(27);
  const ContactGeometry g = contact_geometry(p.pair, testing::random_config(rng, p));
  EXPECT_LE(second_order_qddot(g, Vec5::Zero(), Vec6::Zero()).norm(), 0.0);
}

TEST(SecondOrder, MatchesFiniteDifferenceOfFirstOrder) {
  Rng rng(28);
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 15; ++i) {
      const Vec5 q = testing::random_config(rng, p).to_vector();
      const SecondOrderCase c = second_order_case(p.pair, q, rng.vec3(2.0), rng.vec3(2.0));
      const ContactGeometry g = contact_geometry(p.pair, ContactConfig::from_vector(q));
      const Vec5 qdd = second_order_qddot(g, c.qd, c.dv_rel);
      EXPECT_LE((qdd - c.qdd_fd).cwiseAbs().maxCoeff(), 1e-4) << p.name << " " << (qdd - c.qdd_fd).transpose();
    }
  }
}

TEST(SecondOrder, PsiRowMatchesExplicitExpression) {
  Rng rng(29);
  const Mat2 e1 = e1_matrix();
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 10; ++i) {
      const ContactGeometry g = contact_geometry(p.pair, testing::random_config(rng, p));
      const Vec3 w = rng.vec3();
      const Vec5 qd = first_order_qdot(g, w);
      Vec6 dv;
      dv << rng.vec3(), rolling_accel(g, qd, w);
      const Vec5 qdd = second_order_qddot(g, qd, dv);
      const LocalGeometry& o = g.o;
      const LocalGeometry& h = g.h;
      const Vec2 uo = qd.head<2>(), uh = qd.segment<2>(2);
      const Eigen::Vector3d wo(uo(0) * uo(0), uo(0) * uo(1), uo(1) * uo(1));
      const Eigen::Vector3d wh(uh(0) * uh(0), uh(0) * uh(1), uh(1) * uh(1));
      const double expected =
          -Vec2(w(1), -w(0)).dot(g.R_psi * e1 * o.sqrtG_inv * o.L * uo) - dv(2) +
          o.sigma * (o.gamma.dot(qdd.head<2>()) + o.gamma_bbar.dot(wo)) +
          h.sigma * (h.gamma.dot(qdd.segment<2>(2)) + h.gamma_bbar.dot(wh));
      EXPECT_NEAR(qdd(4), expected, 1e-10);
    }
  }
}

TEST(RollingAccel, ZeroRatesGiveZero) {
  const auto p = testing::sphere_on_plane();
  EXPECT_EQ(rolling_accel_constraint(contact_geometry(p.pair, kTurntableStart), Vec5::Zero()),
            Vec3::Zero());
}

TEST(RollingAccel, NoSpinKillsTangentialComponents) {
  Rng rng(30);
  const auto p = testing::ellipsoid_in_dish();
  for (int i = 0; i < 20; ++i) {
    const ContactGeometry g = contact_geometry(p.pair, testing::random_config(rng, p));
    const Vec3 w(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
    const Vec3 a = rolling_accel(g, first_order_qdot(g, w), w);
    EXPECT_EQ(a(0), 0.0);
    EXPECT_EQ(a(1), 0.0);
  }
}

TEST(RollingAccel, EqualsMinusOmegaCrossContactVelocity) {
  Rng rng(31);
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 20; ++i) {
      const ContactConfig q = testing::random_config(rng, p);
      const ContactGeometry g = contact_geometry(p.pair, q);
      const ContactFrames f = contact_frames(Transform::identity(), g);
      const Vec3 w = rng.vec3();
      const Vec5 qd = first_order_qdot(g, w);
      const ChartDerivatives d = p.pair.object->derivatives(q.u_o);
      const Vec3 v_contact = f.T_o_ch.rotation.transpose() * (d.fu * qd(0) + d.fv * qd(1));
      EXPECT_LE((rolling_accel_constraint(g, qd) + w.cross(v_contact)).norm(), 1e-10);
    }
  }
}

TEST(PureRolling, ZeroRatesGiveZero) {
  const auto p = testing::ellipsoid_in_dish();
  Rng rng(32);
  EXPECT_EQ(pure_rolling_alpha_z(contact_geometry(p.pair, testing::random_config(rng, p)),
                                 Vec5::Zero()),
            0.0);
}

TEST(PureRolling, SphereOnPlaneNeedsNoSpinCorrection) {
  Rng rng(33);
  const auto p = testing::sphere_on_plane();
  for (int i = 0; i < 50; ++i) {
    const ContactGeometry g = contact_geometry(p.pair, testing::random_config(rng, p));
    const Vec3 w(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.0);
    EXPECT_NEAR(pure_rolling_alpha_z(g, first_order_qdot(g, w)), 0.0, 1e-12);
  }
}

TEST(PureRolling, SpinningStateRejected) {
  const auto p = testing::sphere_on_plane();
  const ContactGeometry g = contact_geometry(p.pair, kTurntableStart);
  EXPECT_THROW(pure_rolling_alpha_z(g, first_order_qdot(g, Vec3(0, 0, 1e-3))), ConstraintError);
}

// d(omega_z)/dt from a second-order Taylor step of (q, q') with the chosen alpha_z.
double spin_rate(const ContactPair& pair, const Vec5& q, const Vec5& qd, const Vec6& dv) {
  const ContactGeometry g = contact_geometry(pair, ContactConfig::from_vector(q));
  const Vec5 qdd = second_order_qddot(g, qd, dv);
  const double h = 1e-5;
  auto wz = [&](double s) {
    const Vec5 qs = q + s * qd + 0.5 * s * s * qdd;
    const ContactGeometry gs = contact_geometry(pair, ContactConfig::from_vector(qs));
    return recover_omega(gs, qd + s * qdd).omega(2);
  };
  return (wz(h) - wz(-h)) / (2 * h);
}

TEST(PureRolling, ClosedFormHoldsSpinAtZero) {
  Rng rng(34);
  for (const NamedPair& p : testing::all_pairs()) {
    double worst_zero_alpha = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec5 q = testing::random_config(rng, p).to_vector();
      const ContactGeometry g = contact_geometry(p.pair, ContactConfig::from_vector(q));
      const Vec3 w(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.0);
      const Vec5 qd = first_order_qdot(g, w);
      Vec6 dv;
      dv << rng.uniform(-1, 1), rng.uniform(-1, 1), pure_rolling_alpha_z(g, qd),
          rolling_accel(g, qd, w);
      EXPECT_LT(std::abs(spin_rate(p.pair, q, qd, dv)), 1e-6) << p.name;
      dv(2) = 0.0;
      worst_zero_alpha = std::max(worst_zero_alpha, std::abs(spin_rate(p.pair, q, qd, dv)));
    }
    if (p.name == "ellipsoid_on_ellipsoid" || p.name == "ellipsoid_in_dish") {
      EXPECT_GT(worst_zero_alpha, 1e-2) << p.name;
    }
  }
}

// d/dt of the object twist along a hand motion with constant body acceleration
// and a relative rotation prescribed in hand coordinates.
TEST(ObjectAccel, MatchesFiniteDifferenceOfObjectTwist) {
  Rng rng(35);
  for (const NamedPair& p : testing::all_pairs()) {
    for (int i = 0; i < 10; ++i) {
      const Vec5 q0 = testing::random_config(rng, p).to_vector();
      const Vec3 w0 = rng.vec3(), w1 = rng.vec3();
      const Twist vh0 = rng.vec6();
      const Vec6 ah = rng.vec6();
      auto w_hand = [&](double t) { return Vec3(w0 + t * w1); };
      auto twist_at = [&](const Vec5& q, double t) {
        const ContactGeometry g = contact_geometry(p.pair, ContactConfig::from_vector(q));
        const ContactFrames f = contact_frames(Transform::identity(), g);
        const Vec3 w = g.h.gauss.transpose() * w_hand(t);
        return object_twist(f, vh0 + t * ah, stack(w, Vec3::Zero()));
      };
      const double dt = 1e-5;
      const Vec5 qp = rk4_step(p.pair, q0, 0.0, dt, w_hand);
      const Vec5 qm = rk4_step(p.pair, q0, 0.0, -dt, w_hand);
      const Vec6 fd = (twist_at(qp, dt) - twist_at(qm, -dt)) / (2 * dt);

      const SecondOrderCase c = second_order_case(p.pair, q0, w0, w1);
      const ContactGeometry g = contact_geometry(p.pair, ContactConfig::from_vector(q0));
      const ContactFrames f = contact_frames(Transform::identity(), g);
      const Vec3 w = g.h.gauss.transpose() * w0;
      const Vec6 acc = object_accel(f, vh0, ah, w, c.dv_rel);
      EXPECT_LE((acc - fd).cwiseAbs().maxCoeff(), 1e-4) << p.name << "\n" << (acc - fd).transpose();
    }
  }
}

TEST(ObjectAccel, ZeroVelocitiesGivePureAdjointTransport) {
  Rng rng(36);
  const auto p = testing::sphere_on_ellipsoid();
  const ContactFrames f = contact_frames(Transform::identity(), testing::random_config(rng, p), p.pair);
  EXPECT_LE(k4(f, Twist::Zero(), Vec3::Zero()).norm(), 0.0);
  const Vec6 ah = rng.vec6(), dv = rng.vec6();
  EXPECT_LE((object_accel(f, Twist::Zero(), ah, Vec3::Zero(), dv) -
             (adjoint(f.T_oh) * ah + adjoint(f.T_o_ch) * dv)).norm(), 1e-15);
}

TEST(ObjectAccel, RigidAttachmentMatchesTransport) {
  Rng rng(37);
  const auto p = testing::sphere_in_dish();
  for (int i = 0; i < 20; ++i) {
    const ContactFrames f = contact_frames(Transform::identity(), testing::random_config(rng, p), p.pair);
    const Twist vh = rng.vec6();
    const Vec6 ah = rng.vec6();
    EXPECT_LE((object_accel(f, vh, ah, Vec3::Zero(), Vec6::Zero()) - adjoint(f.T_oh) * ah).norm(),
              1e-10);
  }
}

}  // namespace
}  // namespace rolling
