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

// Rolling dynamics of an object on a motion-controlled hand.
//
// The hand is driven kinematically: the control is the hand body
// acceleration dV_h. Newton-Euler for the object, with its acceleration
// written through the second-order contact kinematics, leaves a 6x6 linear
// system in the relative rotational acceleration and the contact wrench.

#ifndef ROLLING_DYNAMICS_HPP_
#define ROLLING_DYNAMICS_HPP_

#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "rolling/contact.hpp"
#include "rolling/errors.hpp"
#include "rolling/geom3d.hpp"
#include "rolling/integrator.hpp"
#include "rolling/surface.hpp"

namespace rolling {

inline constexpr int kStateDim = 22;
inline constexpr int kControlDim = 6;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using ControlVector = Vec6;

// Offsets into the stacked state s = (Phi_sh, r_sh, q, V_h, q_dot).
namespace state_index {
inline constexpr int kRpy = 0;
inline constexpr int kPosition = 3;
inline constexpr int kQ = 6;
inline constexpr int kTwist = 11;
inline constexpr int kQdot = 17;
}  // namespace state_index

struct RollingState {
  EulerRPY rpy;
  Vec3 r_sh = Vec3::Zero();
  ContactConfig q;
  Twist V_h = Twist::Zero();
  ContactRates qdot = ContactRates::Zero();

  static RollingState from_vector(const Eigen::Ref<const Eigen::VectorXd>& s) {
    if (s.size() != kStateDim) throw ParameterError("state vector must have 22 entries");
    RollingState out;
    out.rpy = EulerRPY::from_vector(s.segment<3>(state_index::kRpy));
    out.r_sh = s.segment<3>(state_index::kPosition);
    out.q = ContactConfig::from_vector(s.segment<5>(state_index::kQ));
    out.V_h = s.segment<6>(state_index::kTwist);
    out.qdot = s.segment<5>(state_index::kQdot);
    return out;
  }
  StateVector to_vector() const {
    StateVector s;
    s << rpy.to_vector(), r_sh, q.to_vector(), V_h, qdot;
    return s;
  }
  Transform hand_pose() const { return {rotation_from_rpy(rpy), r_sh}; }
};

struct ObjectModel {
  ChartPtr chart;
  double mass = 0.0;
  Vec3 inertia = Vec3::Zero();  // principal moments about the body axes

  void validate() const {
    if (!chart) throw ParameterError("object chart missing");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("object mass must be positive");
    if (!(inertia.minCoeff() > 0.0) || !inertia.allFinite()) {
      throw ParameterError("object inertia must be positive definite");
    }
  }
  Mat6 spatial_inertia() const {
    Mat6 g = Mat6::Zero();
    g.topLeftCorner<3, 3>() = inertia.asDiagonal();
    g.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return g;
  }
};

// Homogeneous solid sphere: J = (2/5) m r^2.
inline ObjectModel solid_sphere(double radius, double mass) {
  ObjectModel m{make_sphere(radius), mass, Vec3::Constant(0.4 * mass * radius * radius)};
  m.validate();
  return m;
}

enum class FrictionMode { kRolling, kPureRolling };

struct FrictionModel {
  FrictionMode mode = FrictionMode::kRolling;
  double mu_s = 1.0;
  double mu_spin = 0.0;  // meters; pure rolling only

  void validate() const {
    if (!(mu_s >= 0.0) || !(mu_spin >= 0.0)) {
      throw ParameterError("friction coefficients must be non-negative");
    }
  }
};

// How the pure-rolling normal acceleration alpha_z is chosen. kZero reproduces
// the simplification alpha_z = 0, kept for regression comparison only.
enum class SpinAccelRule { kClosedForm, kZero };

struct RollingSystem {
  ObjectModel object;
  ChartPtr hand;
  FrictionModel friction;
  Vec3 gravity{0.0, 0.0, -9.81};
  SpinAccelRule spin_rule = SpinAccelRule::kClosedForm;

  ContactPair pair() const { return {object.chart, hand}; }
  void validate() const {
    object.validate();
    if (!hand) throw ParameterError("hand chart missing");
    friction.validate();
    if (!gravity.allFinite()) throw ParameterError("gravity must be finite");
  }
};

struct ContactSolution {
  Vec3 alpha = Vec3::Zero();
  Wrench wrench = Wrench::Zero();  // in {c_h}, acting on the object
  bool valid_normal = true;
  bool valid_friction = true;
  bool valid_spin = true;
  Vec3 omega_rel = Vec3::Zero();
  Vec3 a_roll = Vec3::Zero();

  bool valid() const { return valid_normal && valid_friction && valid_spin; }
};

inline constexpr double kMaxConditionNumber = 1e12;

inline Wrench gravity_wrench(const ObjectModel& model, const Rotation& R_so, const Vec3& g) {
  return stack(Vec3::Zero(), R_so.transpose() * (model.mass * g));
}

// Everything the dynamics needs at one state.
struct DynamicsPoint {
  ContactGeometry geometry;
  ContactFrames frames;
  Vec3 omega = Vec3::Zero();
  Twist V_o = Twist::Zero();
};

// With `strict`, rates violating the rolling consistency constraint by more
// than kConsistencyTolerance are rejected. Integrator trial stages run
// non-strict; accepted states are checked separately.
inline DynamicsPoint dynamics_point(const RollingSystem& sys, const RollingState& s,
                                    bool strict = true) {
  DynamicsPoint p;
  p.geometry = contact_geometry(sys.pair(), s.q);
  p.frames = contact_frames(s.hand_pose(), p.geometry);
  p.omega = strict ? omega_from_qdot(p.geometry, s.qdot) : recover_omega(p.geometry, s.qdot).omega;
  p.V_o = object_twist(p.frames, s.V_h, stack(p.omega, Vec3::Zero()));
  return p;
}

inline ContactSolution solve_contact(const RollingSystem& sys, const DynamicsPoint& p,
                                     const RollingState& s, const Vec6& hand_accel) {
  const bool pure = sys.friction.mode == FrictionMode::kPureRolling;
  ContactSolution sol;
  sol.omega_rel = p.omega;
  sol.a_roll = rolling_accel(p.geometry, s.qdot, p.omega);
  double alpha_z = 0.0;
  if (pure && sys.spin_rule == SpinAccelRule::kClosedForm) {
    alpha_z = pure_rolling_alpha_z_unchecked(p.geometry, s.qdot, p.omega);
  }

  const Mat6 G = sys.object.spatial_inertia();
  const Mat6 ad_och = adjoint(p.frames.T_o_ch);
  const Mat6 ad_cho_t = adjoint(p.frames.T_ch_o).transpose();
  Vec6 known_rel;
  known_rel << 0.0, 0.0, alpha_z, sol.a_roll;
  const Vec6 known = adjoint(p.frames.T_oh) * hand_accel + ad_och * known_rel +
                     k4(p.frames, s.V_h, p.omega);
  const Wrench f_g = gravity_wrench(sys.object, p.frames.T_so.rotation, sys.gravity);
  const Vec6 rhs = lie_ad(p.V_o).transpose() * G * p.V_o + f_g - G * known;

  Mat6 A;
  if (pure) {
    A << G * ad_och.leftCols<2>(), -ad_cho_t.col(2), -ad_cho_t.rightCols<3>();
  } else {
    A << G * ad_och.leftCols<3>(), -ad_cho_t.rightCols<3>();
  }
  const Eigen::JacobiSVD<Mat6> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(5) > 0.0) || sv(0) / sv(5) > kMaxConditionNumber) {
    throw SingularSystemError("rolling dynamics system is ill-conditioned");
  }
  const Vec6 x = svd.solve(rhs);
  if (pure) {
    sol.alpha << x(0), x(1), alpha_z;
    sol.wrench << 0.0, 0.0, x(2), x.tail<3>();
  } else {
    sol.alpha = x.head<3>();
    sol.wrench << 0.0, 0.0, 0.0, x.tail<3>();
  }
  const double fz = sol.wrench(5);
  sol.valid_normal = fz >= 0.0;
  sol.valid_friction = std::hypot(sol.wrench(3), sol.wrench(4)) <= sys.friction.mu_s * fz;
  sol.valid_spin = !pure || std::abs(sol.wrench(2)) <= sys.friction.mu_spin * fz;
  return sol;
}

inline ContactSolution solve_contact(const RollingSystem& sys, const RollingState& s,
                                     const Vec6& hand_accel) {
  return solve_contact(sys, dynamics_point(sys, s), s, hand_accel);
}

// Newton-Euler residual G dV_o - ad^T G V_o - F_g - Ad^T F_c for a solution.
inline Vec6 newton_euler_residual(const RollingSystem& sys, const RollingState& s,
                                  const Vec6& hand_accel, const ContactSolution& sol) {
  const DynamicsPoint p = dynamics_point(sys, s);
  const Mat6 G = sys.object.spatial_inertia();
  Vec6 dv_rel;
  dv_rel << sol.alpha, sol.a_roll;
  const Vec6 dV_o = object_accel(p.frames, s.V_h, hand_accel, p.omega, dv_rel);
  return G * dV_o - lie_ad(p.V_o).transpose() * G * p.V_o -
         gravity_wrench(sys.object, p.frames.T_so.rotation, sys.gravity) -
         adjoint(p.frames.T_ch_o).transpose() * sol.wrench;
}

inline StateVector state_derivative(const RollingSystem& sys, const RollingState& s,
                                    const Vec6& hand_accel, ContactSolution* solution = nullptr,
                                    bool strict = true) {
  const DynamicsPoint p = dynamics_point(sys, s, strict);
  const ContactSolution sol = solve_contact(sys, p, s, hand_accel);
  const SecondOrderTerms so = second_order_terms(p.geometry, s.qdot, p.omega);
  Vec6 dv_rel;
  dv_rel << sol.alpha, sol.a_roll;
  StateVector ds;
  ds.segment<3>(state_index::kRpy) = rpy_rates_from_body_omega(s.rpy, angular(s.V_h));
  ds.segment<3>(state_index::kPosition) = p.frames.T_sh.rotation * linear(s.V_h);
  ds.segment<5>(state_index::kQ) = s.qdot;
  ds.segment<6>(state_index::kTwist) = hand_accel;
  ds.segment<5>(state_index::kQdot) = so.drift + so.K3 * dv_rel;
  if (solution) *solution = sol;
  return ds;
}

inline StateVector state_derivative(const RollingSystem& sys, const StateVector& s,
                                    const Vec6& hand_accel, ContactSolution* solution = nullptr,
                                    bool strict = true) {
  return state_derivative(sys, RollingState::from_vector(s), hand_accel, solution, strict);
}

// Kinetic plus potential energy of the object; potential datum at r_so = 0.
inline double mechanical_energy(const RollingSystem& sys, const RollingState& s) {
  const DynamicsPoint p = dynamics_point(sys, s);
  const Mat6 G = sys.object.spatial_inertia();
  return 0.5 * p.V_o.dot(G * p.V_o) - sys.object.mass * sys.gravity.dot(p.frames.T_so.translation);
}

// ---------------------------------------------------------------------------
// Simulation.

enum class HaltCause {
  kNone,
  kNormalForce,
  kFriction,
  kSpinFriction,
  kDomain,
  kSingular,
  kConstraint,
  kGimbal,
};

inline const char* to_string(HaltCause c) {
  switch (c) {
    case HaltCause::kNone: return "none";
    case HaltCause::kNormalForce: return "normal_force";
    case HaltCause::kFriction: return "friction";
    case HaltCause::kSpinFriction: return "spin_friction";
    case HaltCause::kDomain: return "domain";
    case HaltCause::kSingular: return "singular";
    case HaltCause::kConstraint: return "constraint";
    case HaltCause::kGimbal: return "gimbal";
  }
  return "unknown";
}

// Control law u(t, s); s is the 22-vector state.
using ControlLaw = std::function<Vec6(double, const StateVector&)>;

inline ControlLaw zero_control() {
  return [](double, const StateVector&) { return Vec6::Zero(); };
}

struct SimulationOptions {
  IntegratorOptions integrator;
  double sample_dt = 0.01;  // dense-output sampling; <= 0 records accepted steps
  bool project = true;      // least-squares projection of q_dot onto range(K1)
  bool halt_on_invalid = true;
};

struct TrajectorySample {
  double t = 0.0;
  StateVector state;
  Vec6 control = Vec6::Zero();
  Wrench wrench = Wrench::Zero();
  bool valid_normal = true;
  bool valid_friction = true;
  bool valid_spin = true;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  HaltCause halt = HaltCause::kNone;
  double halt_time = 0.0;
  std::string halt_message;
  IntegrationStats stats;
  double max_projection = 0.0;  // largest q_dot correction applied
  double max_gap = 0.0;         // largest contact-point mismatch seen
  double max_residual = 0.0;    // largest consistency residual before projection

  bool halted() const { return halt != HaltCause::kNone; }
  double final_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

namespace detail {

inline HaltCause invalid_cause(const ContactSolution& sol) {
  if (!sol.valid_normal) return HaltCause::kNormalForce;
  if (!sol.valid_friction) return HaltCause::kFriction;
  if (!sol.valid_spin) return HaltCause::kSpinFriction;
  return HaltCause::kNone;
}

inline double contact_gap(const RollingSystem& sys, const RollingState& s) {
  const ContactFrames f = contact_frames(s.hand_pose(), s.q, sys.pair());
  return (f.T_sh.apply(f.r_h_ph) - f.T_so.apply(f.r_o_po)).norm();
}

}  // namespace detail

inline TrajectorySample make_sample(const RollingSystem& sys, double t, const StateVector& s,
                                    const ControlLaw& control) {
  TrajectorySample out;
  out.t = t;
  out.state = s;
  out.control = control(t, s);
  const ContactSolution sol = solve_contact(sys, RollingState::from_vector(s), out.control);
  out.wrench = sol.wrench;
  out.valid_normal = sol.valid_normal;
  out.valid_friction = sol.valid_friction;
  out.valid_spin = sol.valid_spin;
  return out;
}

inline Trajectory simulate(const RollingSystem& sys, const RollingState& s0, const ControlLaw& control,
                           double t_f, const SimulationOptions& opt = {}) {
  sys.validate();
  if (!(t_f >= 0.0)) throw ParameterError("simulate: final time must be non-negative");
  Trajectory traj;
  const StateVector x0 = s0.to_vector();
  // Validates the initial state (throws on inconsistent rates).
  traj.samples.push_back(make_sample(sys, 0.0, x0, control));
  traj.max_gap = detail::contact_gap(sys, s0);
  if (opt.halt_on_invalid) {
    const HaltCause c = detail::invalid_cause(solve_contact(sys, s0, traj.samples[0].control));
    if (c != HaltCause::kNone) {
      traj.halt = c;
      traj.halt_message = "initial contact wrench invalid";
      return traj;
    }
  }

  auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const StateVector s = x;
    return state_derivative(sys, s, control(t, s), nullptr, false);
  };
  long next_sample = 1;

  auto observer = [&](const DenseSegment& seg, Eigen::VectorXd& y) {
    // Halt detection at the segment end; bisect the dense output for onset.
    HaltCause cause = HaltCause::kNone;
    if (opt.halt_on_invalid) {
      const StateVector se = y;
      cause = detail::invalid_cause(solve_contact(sys, RollingState::from_vector(se), control(seg.t1, se)));
    }
    double t_end = seg.t1;
    if (cause != HaltCause::kNone) {
      double lo = seg.t0, hi = seg.t1;
      for (int i = 0; i < 60 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        const StateVector sm = seg.eval(mid);
        const ContactSolution sol = solve_contact(sys, RollingState::from_vector(sm), control(mid, sm));
        (detail::invalid_cause(sol) != HaltCause::kNone ? hi : lo) = mid;
      }
      t_end = hi;
    }
    if (opt.sample_dt > 0.0) {
      for (double ts = next_sample * opt.sample_dt; ts <= std::min(t_end, t_f);
           ts = ++next_sample * opt.sample_dt) {
        traj.samples.push_back(make_sample(sys, ts, seg.eval(ts), control));
      }
    } else {
      traj.samples.push_back(make_sample(sys, t_end, seg.eval(t_end), control));
    }
    if (cause != HaltCause::kNone) {
      if (traj.samples.back().t < t_end) {
        traj.samples.push_back(make_sample(sys, t_end, seg.eval(t_end), control));
      }
      traj.halt = cause;
      traj.halt_time = t_end;
      traj.halt_message = std::string("contact wrench invalid: ") + to_string(cause);
      return StepAction::kStop;
    }
    const RollingState se = RollingState::from_vector(StateVector(y));
    traj.max_gap = std::max(traj.max_gap, detail::contact_gap(sys, se));
    const ContactGeometry g = contact_geometry(sys.pair(), se.q);
    traj.max_residual = std::max(traj.max_residual, recover_omega(g, se.qdot).residual);
    if (opt.project) {
      const QdotProjection pr = project_qdot(g, se.qdot);
      traj.max_projection = std::max(traj.max_projection, pr.correction);
      if (pr.correction > 0.0) y.segment<5>(state_index::kQdot) = pr.qdot;
    }
    return StepAction::kContinue;
  };

  try {
    const IntegrationResult r =
        integrate_dp45(rhs, 0.0, Eigen::VectorXd(x0), t_f, opt.integrator, observer);
    traj.stats = r.stats;
    if (!traj.halted() && opt.sample_dt > 0.0 && traj.samples.back().t < t_f) {
      traj.samples.push_back(make_sample(sys, t_f, r.y, control));
    }
  } catch (const DomainError& e) {
    traj.halt = HaltCause::kDomain;
    traj.halt_message = e.what();
  } catch (const SingularGeometryError& e) {
    traj.halt = HaltCause::kSingular;
    traj.halt_message = e.what();
  } catch (const SingularSystemError& e) {
    traj.halt = HaltCause::kSingular;
    traj.halt_message = e.what();
  } catch (const GimbalError& e) {
    traj.halt = HaltCause::kGimbal;
    traj.halt_message = e.what();
  } catch (const ConstraintError& e) {
    traj.halt = HaltCause::kConstraint;
    traj.halt_message = e.what();
  }
  if (traj.halted() && traj.halt_time == 0.0) traj.halt_time = traj.final_time();
  return traj;
}

// ---------------------------------------------------------------------------
// CSV export.

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return r.ec == std::errc() ? std::string(buf, r.ptr) : std::string("nan");
}

inline std::vector<std::string> state_column_names() {
  return {"phi_roll", "phi_pitch", "phi_yaw", "r_x",   "r_y",   "r_z",   "u_o",   "v_o",
          "u_h",      "v_h",       "psi",     "w_hx",  "w_hy",  "w_hz",  "v_hx",  "v_hy",
          "v_hz",     "du_o",      "dv_o",    "du_h",  "dv_h",  "dpsi"};
}

inline std::vector<std::string> csv_column_names() {
  std::vector<std::string> cols{"t"};
  for (const auto& c : state_column_names()) cols.push_back(c);
  for (const char* c : {"acc_wx", "acc_wy", "acc_wz", "acc_vx", "acc_vy", "acc_vz", "tau_x", "tau_y",
                        "tau_z", "f_x", "f_y", "f_z", "valid_normal", "valid_friction", "valid_spin"}) {
    cols.emplace_back(c);
  }
  return cols;
}

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  const auto cols = csv_column_names();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const TrajectorySample& s : traj.samples) {
    os << format_double(s.t);
    for (int i = 0; i < kStateDim; ++i) os << ',' << format_double(s.state(i));
    for (int i = 0; i < 6; ++i) os << ',' << format_double(s.control(i));
    for (int i = 0; i < 6; ++i) os << ',' << format_double(s.wrench(i));
    os << ',' << int(s.valid_normal) << ',' << int(s.valid_friction) << ',' << int(s.valid_spin) << '\n';
  }
}

}  // namespace rolling

#endif  // ROLLING_DYNAMICS_HPP_
