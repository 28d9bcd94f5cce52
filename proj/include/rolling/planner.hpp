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


// Iterative direct collocation: trapezoidal transcription of the rolling
// dynamics, solved coarse-to-fine and verified by a fine rollout.
//
// Decision vector, knot by knot: the free state entries followed by the
// active hand accelerations. Frozen state entries are held at their start
// values and inactive controls at zero.

#ifndef ROLLING_PLANNER_HPP_
#define ROLLING_PLANNER_HPP_

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "json.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/errors.hpp"
#include "rolling/nlp.hpp"

namespace rolling {

using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

inline void require_psd(const MatX& m, const char* what, double tol = 1e-10) {
  if (m.rows() != m.cols()) throw ParameterError(std::string(what) + " must be square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw ParameterError(std::string(what) + " must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<MatX> es(m);
  if (es.eigenvalues().minCoeff() < -tol * scale) {
    throw ParameterError(std::string(what) + " must be positive semidefinite");
  }
}

struct CostWeights {
  StateMatrix P1 = StateMatrix::Zero();  // terminal
  StateMatrix Q = StateMatrix::Zero();   // tracking
  MatX R;                                // active controls

  void validate(Eigen::Index n_controls) const {
    require_psd(P1, "P1");
    require_psd(Q, "Q");
    if (R.rows() != n_controls) throw ParameterError("R must match the number of active controls");
    require_psd(R, "R");
  }
};

// 0.5 (s - s_des)' Q (s - s_des) + 0.5 u' R u.
inline double running_cost(const StateVector& s, const VecX& u, const CostWeights& w,
                           const StateVector& s_des) {
  if (u.size() != w.R.rows()) throw ParameterError("running_cost: control dimension mismatch");
  const StateVector e = s - s_des;
  return 0.5 * e.dot(w.Q * e) + 0.5 * u.dot(w.R * u);
}

inline double terminal_cost(const StateVector& s, const CostWeights& w, const StateVector& s_goal) {
  const StateVector e = s - s_goal;
  return 0.5 * e.dot(w.P1 * e);
}

struct CollocationProblem {
  RollingSystem system;
  int segments = 16;
  double t_f = 1.0;
  StateVector s_start = StateVector::Zero();
  StateVector s_goal = StateVector::Zero();
  std::array<bool, 6> active{true, true, true, true, true, true};
  Vec6 u_min = Vec6::Constant(-50.0);
  Vec6 u_max = Vec6::Constant(50.0);
  std::vector<int> frozen;  // state indices held at s_start
  bool friction_constraints = true;
  // Extra clearance kept from chart singularity margins and the pitch
  // singularity, so finite differences stay evaluable.
  double domain_clearance = 1e-2;

  int knots() const { return segments + 1; }
  double dt() const { return t_f / segments; }
  double time(int k) const { return k == segments ? t_f : k * dt(); }
  StateVector desired(double t) const { return s_start + (t / t_f) * (s_goal - s_start); }

  std::vector<int> active_controls() const {
    std::vector<int> out;
    for (int i = 0; i < 6; ++i) {
      if (active[i]) out.push_back(i);
    }
    return out;
  }
  std::vector<int> free_states() const {
    std::vector<int> out;
    for (int i = 0; i < kStateDim; ++i) {
      if (std::find(frozen.begin(), frozen.end(), i) == frozen.end()) out.push_back(i);
    }
    return out;
  }

  void validate() const {
    system.validate();
    if (segments < 2) throw ParameterError("collocation needs at least two segments");
    if (!(t_f > 0.0) || !std::isfinite(t_f)) throw ParameterError("final time must be positive");
    if (!s_start.allFinite() || !s_goal.allFinite()) throw ParameterError("start and goal must be finite");
    for (int i : active_controls()) {
      if (!std::isfinite(u_min(i)) || !std::isfinite(u_max(i)) || u_min(i) > u_max(i)) {
        throw ParameterError("active control bounds must be finite and ordered");
      }
    }
    for (int i : frozen) {
      if (i < 0 || i >= kStateDim) throw ParameterError("frozen state index out of range");
    }
  }
};

// Contact configuration reached by rolling without spin so that the hand
// contact coordinates move along a straight line by `du_h` (RK4, `steps`).
inline ContactConfig roll_to_hand_point(const ContactPair& pair, const ContactConfig& q0, const Vec2& du_h,
                                        int steps = 1000) {
  if (steps < 1) throw ParameterError("roll_to_hand_point: steps must be positive");
  auto rate = [&](const Vec5& x) -> Vec5 {
    const ContactConfig q = ContactConfig::from_vector(x);
    const ContactGeometry g = contact_geometry(pair, q);
    const Mat53 k = k1(g);
    const Eigen::Matrix2d a = k.block<2, 2>(2, 0);
    const Vec2 wxy = a.fullPivLu().solve(du_h);
    if (!wxy.allFinite() || (a * wxy - du_h).norm() > 1e-9 * (1.0 + du_h.norm())) {
      throw SingularGeometryError("roll_to_hand_point: hand coordinates not reachable by rolling");
    }
    return first_order_qdot(g, Vec3(wxy(0), wxy(1), 0.0));
  };
  Vec5 x = q0.to_vector();
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec5 k1v = rate(x);
    const Vec5 k2v = rate(x + 0.5 * h * k1v);
    const Vec5 k3v = rate(x + 0.5 * h * k2v);
    const Vec5 k4v = rate(x + h * k3v);
    x += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return ContactConfig::from_vector(x);
}

// Contact configuration with the hand contact at `u_h` and the object turned
// by the hand-frame rotation vector `rotation` relative to its attitude at
// q0. Newton iteration on (u_o, psi) starting from q0.
inline ContactConfig reorient_contact(const ContactPair& pair, const ContactConfig& q0, const Vec2& u_h,
                                      const Vec3& rotation) {
  auto attitude = [&](const ContactConfig& q) {
    return contact_frames(Transform::identity(), q, pair).T_ho.rotation;
  };
  const Mat3 target = Eigen::AngleAxisd(rotation.norm(), rotation.norm() > 0 ? Vec3(rotation.normalized())
                                                                              : Vec3::UnitX())
                          .toRotationMatrix() *
                      attitude(q0);
  auto residual = [&](const Vec3& x) -> Vec3 {
    const ContactConfig q{x.head<2>(), u_h, x(2)};
    const Eigen::AngleAxisd err(target.transpose() * attitude(q));
    return err.angle() * err.axis();
  };
  Vec3 x(q0.u_o(0), q0.u_o(1), q0.psi);
  for (int it = 0; it < 100; ++it) {
    const Vec3 r = residual(x);
    if (r.norm() < 1e-12) return {x.head<2>(), u_h, x(2)};
    Mat3 j;
    for (int c = 0; c < 3; ++c) {
      Vec3 xp = x, xm = x;
      xp(c) += 1e-7;
      xm(c) -= 1e-7;
      j.col(c) = (residual(xp) - residual(xm)) / 2e-7;
    }
    Vec3 step = -j.fullPivLu().solve(r);
    if (!step.allFinite()) break;
    if (step.norm() > 0.3) step *= 0.3 / step.norm();
    x += step;
  }
  throw SingularGeometryError("reorient_contact: attitude not reachable from the start configuration");
}

// Knot values of a collocated trajectory. Controls are full 6-vectors.
struct KnotTrajectory {
  std::vector<double> t;
  std::vector<StateVector> s;
  std::vector<Vec6> u;

  int size() const { return static_cast<int>(t.size()); }

  // Piecewise-linear interpolation of the knot controls.
  Vec6 control_at(double time) const {
    if (t.empty()) return Vec6::Zero();
    if (time <= t.front()) return u.front();
    if (time >= t.back()) return u.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin()) - 1;
    const double a = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - a) * u[k] + a * u[k + 1];
  }
  StateVector state_at(double time) const {
    if (time <= t.front()) return s.front();
    if (time >= t.back()) return s.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin()) - 1;
    const double a = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - a) * s[k] + a * s[k + 1];
  }
  ControlLaw control_law() const {
    const KnotTrajectory copy = *this;
    return [copy](double time, const StateVector&) { return copy.control_at(time); };
  }
};

// Uniform knots from t = 0 to t_f, all at `s` with zero controls.
inline KnotTrajectory stationary_guess(const CollocationProblem& p) {
  KnotTrajectory g;
  for (int k = 0; k < p.knots(); ++k) {
    g.t.push_back(p.time(k));
    g.s.push_back(p.s_start);
    g.u.push_back(Vec6::Zero());
  }
  return g;
}

// Resamples a knot trajectory onto the knot grid of `p`.
inline KnotTrajectory resample(const KnotTrajectory& src, const CollocationProblem& p) {
  KnotTrajectory g;
  for (int k = 0; k < p.knots(); ++k) {
    const double t = p.time(k);
    g.t.push_back(t);
    g.s.push_back(src.state_at(t));
    g.u.push_back(src.control_at(t));
  }
  return g;
}

// Trapezoid defects, row k = x_{k+1} - x_k - dt_k/2 (F_{k+1} + F_k).
inline MatX trapezoid_defects(const std::vector<double>& t, const std::vector<VecX>& x,
                              const std::vector<VecX>& u,
                              const std::function<VecX(const VecX&, const VecX&)>& f) {
  if (t.size() < 2 || x.size() != t.size() || u.size() != t.size()) {
    throw ParameterError("trapezoid_defects: knot arrays must have equal length >= 2");
  }
  const Eigen::Index m = x.front().size();
  std::vector<VecX> fk(t.size());
  for (size_t k = 0; k < t.size(); ++k) {
    try {
      fk[k] = f(x[k], u[k]);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "trapezoid_defects: dynamics failed at knot " << k << ": " << e.what();
      throw EvaluationError(os.str());
    }
  }
  MatX d(static_cast<Eigen::Index>(t.size()) - 1, m);
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    if (!(h > 0.0)) throw ParameterError("trapezoid_defects: knot times must increase");
    d.row(static_cast<Eigen::Index>(k)) = (x[k + 1] - x[k] - 0.5 * h * (fk[k + 1] + fk[k])).transpose();
  }
  return d;
}

// Rolling dynamics F(s, u) as used by the transcription.
inline std::function<VecX(const VecX&, const VecX&)> rolling_dynamics(const RollingSystem& sys) {
  return [sys](const VecX& s, const VecX& u) -> VecX {
    return state_derivative(sys, StateVector(s), Vec6(u), nullptr, false);
  };
}

inline MatX trapezoid_defects(const RollingSystem& sys, const KnotTrajectory& k) {
  std::vector<VecX> x(k.s.begin(), k.s.end()), u(k.u.begin(), k.u.end());
  return trapezoid_defects(k.t, x, u, rolling_dynamics(sys));
}

// Transcribed problem plus the layout needed to move between decision
// vectors and knot trajectories.
struct CollocationNlp {
  Nlp nlp;
  CollocationProblem problem;
  std::vector<int> free_states, controls;
  int wrench_rows = 0;  // inequalities per knot

  int knot_width() const { return static_cast<int>(free_states.size() + controls.size()); }
  Eigen::Index equality_count() const { return nlp.n_eq; }
  Eigen::Index bound_count() const {
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < nlp.n; ++i) {
      c += std::isfinite(nlp.lower(i)) + std::isfinite(nlp.upper(i));
    }
    return c;
  }
  // Simple bounds count as two-sided linear inequalities.
  Eigen::Index inequality_count() const { return bound_count() + nlp.n_ineq; }

  VecX pack(const KnotTrajectory& k) const {
    const int w = knot_width();
    VecX x(static_cast<Eigen::Index>(w) * problem.knots());
    for (int j = 0; j < problem.knots(); ++j) {
      int c = j * w;
      for (int i : free_states) x(c++) = k.s[j](i);
      for (int i : controls) x(c++) = k.u[j](i);
    }
    return x;
  }

  KnotTrajectory unpack(const VecX& x) const {
    KnotTrajectory k;
    const int w = knot_width();
    for (int j = 0; j < problem.knots(); ++j) {
      StateVector s = problem.s_start;
      Vec6 u = Vec6::Zero();
      int c = j * w;
      for (int i : free_states) s(i) = x(c++);
      for (int i : controls) u(i) = x(c++);
      k.t.push_back(problem.time(j));
      k.s.push_back(s);
      k.u.push_back(u);
    }
    return k;
  }
};

namespace detail {

struct KnotEval {
  std::vector<StateVector> f;
  std::vector<VecX> w;  // wrench inequality values
};

inline VecX wrench_inequalities(const RollingSystem& sys, const Wrench& wr, int rows) {
  VecX c(rows);
  if (rows == 0) return c;
  const double fz = wr(5);
  c(0) = -fz;
  c(1) = wr(3) * wr(3) + wr(4) * wr(4) - std::pow(sys.friction.mu_s * fz, 2);
  if (rows > 2) c(2) = wr(2) * wr(2) - std::pow(sys.friction.mu_spin * fz, 2);
  return c;
}

}  // namespace detail

inline CollocationNlp assemble_nlp(const CollocationProblem& problem, const CostWeights& weights) {
  problem.validate();
  CollocationNlp out;
  out.problem = problem;
  out.free_states = problem.free_states();
  out.controls = problem.active_controls();
  weights.validate(static_cast<Eigen::Index>(out.controls.size()));
  const bool pure = problem.system.friction.mode == FrictionMode::kPureRolling;
  out.wrench_rows = problem.friction_constraints ? (pure ? 3 : 2) : 0;

  const int nk = problem.knots();
  const int nf = static_cast<int>(out.free_states.size());
  const int nu = static_cast<int>(out.controls.size());
  const int w = nf + nu;
  const double h = problem.dt();
  Nlp& nlp = out.nlp;
  nlp.n = static_cast<Eigen::Index>(w) * nk;
  nlp.lower = VecX::Constant(nlp.n, -std::numeric_limits<double>::infinity());
  nlp.upper = VecX::Constant(nlp.n, std::numeric_limits<double>::infinity());

  // Bounds: controls, chart domains, pitch.
  const auto& od = problem.system.object.chart->domain();
  const auto& hd = problem.system.hand->domain();
  const double clr = problem.domain_clearance;
  auto state_bounds = [&](int i, double& lo, double& hi) {
    lo = -std::numeric_limits<double>::infinity();
    hi = std::numeric_limits<double>::infinity();
    const ChartDomain* d = nullptr;
    int c = 0;
    if (i == state_index::kQ || i == state_index::kQ + 1) {
      d = &od;
      c = i - state_index::kQ;
    } else if (i == state_index::kQ + 2 || i == state_index::kQ + 3) {
      d = &hd;
      c = i - state_index::kQ - 2;
    } else if (i == state_index::kRpy + 1) {
      lo = -std::numbers::pi / 2 + clr;
      hi = std::numbers::pi / 2 - clr;
      return;
    }
    if (d) {
      if (std::isfinite(d->lower(c))) lo = d->lower(c) + d->margin(c) + clr;
      if (std::isfinite(d->upper(c))) hi = d->upper(c) - d->margin(c) - clr;
    }
  };
  for (int k = 0; k < nk; ++k) {
    int c = k * w;
    for (int i : out.free_states) {
      state_bounds(i, nlp.lower(c), nlp.upper(c));
      ++c;
    }
    for (int i : out.controls) {
      nlp.lower(c) = problem.u_min(i);
      nlp.upper(c) = problem.u_max(i);
      ++c;
    }
  }

  // Quadratic objective with trapezoid quadrature weights.
  std::vector<Triplet> trip;
  nlp.gradient = VecX::Zero(nlp.n);
  nlp.constant = 0.0;
  // 0.5 e'Me with e = E z + c, E embedding the free entries and c holding
  // the frozen start values minus the target.
  auto add_state_quadratic = [&](int k, const StateMatrix& m, const StateVector& target, double scale) {
    StateVector c = -target;
    for (int i : problem.frozen) c(i) += problem.s_start(i);
    const StateVector mc = m * c;
    for (int a = 0; a < nf; ++a) {
      const int ia = out.free_states[a];
      nlp.gradient(k * w + a) += scale * mc(ia);
      for (int b = 0; b < nf; ++b) {
        const double v = scale * m(ia, out.free_states[b]);
        if (v != 0.0) trip.emplace_back(k * w + a, k * w + b, v);
      }
    }
    nlp.constant += 0.5 * scale * c.dot(mc);
  };
  for (int k = 0; k < nk; ++k) {
    const double qw = (k == 0 || k == nk - 1) ? 0.5 * h : h;
    add_state_quadratic(k, weights.Q, problem.desired(problem.time(k)), qw);
    for (int a = 0; a < nu; ++a) {
      for (int b = 0; b < nu; ++b) {
        const double v = qw * weights.R(a, b);
        if (v != 0.0) trip.emplace_back(k * w + nf + a, k * w + nf + b, v);
      }
    }
  }
  add_state_quadratic(nk - 1, weights.P1, problem.s_goal, 1.0);
  nlp.hessian.resize(nlp.n, nlp.n);
  nlp.hessian.setFromTriplets(trip.begin(), trip.end());

  nlp.n_eq = static_cast<Eigen::Index>(problem.segments) * nf + nf;
  nlp.n_ineq = static_cast<Eigen::Index>(out.wrench_rows) * nk;

  auto ctx = std::make_shared<const CollocationNlp>(out);
  // Dynamics and wrench rows at every knot.
  auto eval_knots = [ctx](const VecX& x, detail::KnotEval& ev) {
    const KnotTrajectory k = ctx->unpack(x);
    const RollingSystem& sys = ctx->problem.system;
    ev.f.resize(k.size());
    ev.w.resize(k.size());
    for (int j = 0; j < k.size(); ++j) {
      ContactSolution sol;
      try {
        ev.f[j] = state_derivative(sys, k.s[j], k.u[j], &sol, false);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "collocation: dynamics failed at knot " << j << ": " << e.what();
        throw EvaluationError(os.str());
      }
      ev.w[j] = detail::wrench_inequalities(sys, sol.wrench, ctx->wrench_rows);
    }
  };
  nlp.constraints = [ctx, eval_knots, nf, w, h](const VecX& x, VecX& eq, VecX& ineq) {
    detail::KnotEval ev;
    eval_knots(x, ev);
    const int segs = ctx->problem.segments;
    for (int k = 0; k < segs; ++k) {
      for (int a = 0; a < nf; ++a) {
        const int i = ctx->free_states[a];
        eq(k * nf + a) = x((k + 1) * w + a) - x(k * w + a) - 0.5 * h * (ev.f[k + 1](i) + ev.f[k](i));
      }
    }
    for (int a = 0; a < nf; ++a) eq(segs * nf + a) = x(a) - ctx->problem.s_start(ctx->free_states[a]);
    const int r = ctx->wrench_rows;
    for (int k = 0; k <= segs; ++k) {
      for (int c = 0; c < r; ++c) ineq(k * r + c) = ev.w[k](c);
    }
  };
  // Knot functions depend only on their own knot, so one perturbation of a
  // given coordinate at every knot yields a whole column group.
  const double fd = 1e-6;
  nlp.jacobian_cost = 2L * w;
  nlp.jacobian = [ctx, eval_knots, nf, w, h, fd](const VecX& x, SparseMatrix& je, SparseMatrix& ji) {
    const int segs = ctx->problem.segments;
    const int nk = segs + 1;
    const int r = ctx->wrench_rows;
    // dF[k] is 22 x w, dW[k] is r x w.
    std::vector<MatX> dF(nk, MatX::Zero(kStateDim, w)), dW(nk, MatX::Zero(r, w));
    VecX xp = x;
    detail::KnotEval ep, em;
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < nk; ++k) xp(k * w + c) = x(k * w + c) + fd;
      eval_knots(xp, ep);
      for (int k = 0; k < nk; ++k) xp(k * w + c) = x(k * w + c) - fd;
      eval_knots(xp, em);
      for (int k = 0; k < nk; ++k) xp(k * w + c) = x(k * w + c);
      for (int k = 0; k < nk; ++k) {
        dF[k].col(c) = (ep.f[k] - em.f[k]) / (2.0 * fd);
        if (r) dW[k].col(c) = (ep.w[k] - em.w[k]) / (2.0 * fd);
      }
    }
    std::vector<Triplet> te, ti;
    for (int k = 0; k < segs; ++k) {
      for (int a = 0; a < nf; ++a) {
        const int row = k * nf + a;
        const int i = ctx->free_states[a];
        for (int c = 0; c < w; ++c) {
          double v0 = -0.5 * h * dF[k](i, c);
          double v1 = -0.5 * h * dF[k + 1](i, c);
          if (c == a) {
            v0 -= 1.0;
            v1 += 1.0;
          }
          if (v0 != 0.0) te.emplace_back(row, k * w + c, v0);
          if (v1 != 0.0) te.emplace_back(row, (k + 1) * w + c, v1);
        }
      }
    }
    for (int a = 0; a < nf; ++a) te.emplace_back(segs * nf + a, a, 1.0);
    for (int k = 0; k < nk; ++k) {
      for (int rr = 0; rr < r; ++rr) {
        for (int c = 0; c < w; ++c) {
          if (dW[k](rr, c) != 0.0) ti.emplace_back(k * r + rr, k * w + c, dW[k](rr, c));
        }
      }
    }
    je.resize(static_cast<Eigen::Index>(segs) * nf + nf, static_cast<Eigen::Index>(nk) * w);
    ji.resize(static_cast<Eigen::Index>(nk) * r, static_cast<Eigen::Index>(nk) * w);
    je.setFromTriplets(te.begin(), te.end());
    ji.setFromTriplets(ti.begin(), ti.end());
  };
  return out;
}

enum class PlanStatus { kValid, kMaxIters, kInfeasible };

inline const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kValid: return "valid";
    case PlanStatus::kMaxIters: return "max_iters";
    case PlanStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

struct IdcOptions {
  double eta = 0.1;
  int max_iters = 4;
  NlpOptions nlp;
  SimulationOptions fine;  // fine rollout (defaults to the acceptance tolerances)
  bool relax_friction_first = true;
  bool zero_q_after_first = true;
};

struct IdcIteration {
  int segments = 0;
  double solve_seconds = 0.0;
  NlpStatus nlp_status = NlpStatus::kMaxIterations;
  long func_evals = 0;
  double max_defect = 0.0;
  double objective = 0.0;
  double fine_error = std::numeric_limits<double>::infinity();
  bool fine_valid = false;
  std::string message;
};

struct PlanResult {
  PlanStatus status = PlanStatus::kMaxIters;
  KnotTrajectory coarse;
  Trajectory fine;
  double final_error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<IdcIteration> history;
};

// Euclidean distance on the 22-vector, angles in radians.
inline double state_error(const StateVector& a, const StateVector& b) { return (a - b).norm(); }

inline PlanResult plan_idc(const CollocationProblem& problem, const CostWeights& weights,
                           const IdcOptions& opt = {}) {
  problem.validate();
  weights.validate(static_cast<Eigen::Index>(problem.active_controls().size()));
  if (!(opt.eta > 0.0) || opt.max_iters < 1) throw ParameterError("plan_idc: need eta > 0 and max_iters >= 1");
  PlanResult res;
  CollocationProblem p = problem;
  CostWeights wts = weights;
  KnotTrajectory guess = stationary_guess(p);
  NlpOptions nopt = opt.nlp;
  nopt.throw_on_failure = false;
  for (int it = 0; it < opt.max_iters; ++it) {
    res.iterations = it + 1;
    p.friction_constraints = problem.friction_constraints && !(opt.relax_friction_first && it == 0);
    if (it > 0 && opt.zero_q_after_first) wts.Q.setZero();
    IdcIteration rec;
    rec.segments = p.segments;
    const auto t0 = std::chrono::steady_clock::now();
    const CollocationNlp cn = assemble_nlp(p, wts);
    NlpResult nr;
    try {
      nr = solve_nlp(cn.nlp, cn.pack(resample(guess, p)), nopt);
    } catch (const Error& e) {
      rec.message = e.what();
      rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.history.push_back(rec);
      res.status = PlanStatus::kInfeasible;
      return res;
    }
    rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.nlp_status = nr.status;
    rec.func_evals = nr.func_evals;
    rec.objective = nr.objective;
    res.coarse = cn.unpack(nr.x);
    try {
      rec.max_defect = trapezoid_defects(p.system, res.coarse)
                           .unaryExpr([](double v) { return std::abs(v); })
                           .maxCoeff();
    } catch (const Error& e) {
      rec.max_defect = std::numeric_limits<double>::infinity();
    }
    if (nr.status == NlpStatus::kInfeasible) {
      rec.message = "nonlinear program converged to an infeasible point";
      res.history.push_back(rec);
      res.status = PlanStatus::kInfeasible;
      return res;
    }
    res.fine = simulate(p.system, RollingState::from_vector(p.s_start), res.coarse.control_law(), p.t_f,
                        opt.fine);
    rec.fine_valid = !res.fine.halted();
    rec.fine_error = rec.fine_valid ? state_error(res.fine.samples.back().state, p.s_goal)
                                    : std::numeric_limits<double>::infinity();
    if (!rec.fine_valid) rec.message = "fine rollout halted: " + res.fine.halt_message;
    res.final_error = rec.fine_error;
    res.history.push_back(rec);
    if (rec.fine_valid && rec.fine_error < opt.eta) {
      res.status = PlanStatus::kValid;
      return res;
    }
    guess = res.coarse;
    p.segments *= 2;
  }
  res.status = PlanStatus::kMaxIters;
  return res;
}

// One row per knot in the CSV column order of the dynamics module.
inline nlohmann::json knot_rows(const RollingSystem& sys, const KnotTrajectory& k) {
  nlohmann::json rows = nlohmann::json::array();
  for (int j = 0; j < k.size(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    row.push_back(k.t[j]);
    for (int i = 0; i < kStateDim; ++i) row.push_back(k.s[j](i));
    for (int i = 0; i < 6; ++i) row.push_back(k.u[j](i));
    Wrench wr = Wrench::Constant(std::numeric_limits<double>::quiet_NaN());
    bool vn = false, vf = false, vs = false;
    try {
      ContactSolution sol;
      state_derivative(sys, k.s[j], k.u[j], &sol, false);
      wr = sol.wrench;
      vn = sol.valid_normal;
      vf = sol.valid_friction;
      vs = sol.valid_spin;
    } catch (const Error&) {
    }
    for (int i = 0; i < 6; ++i) row.push_back(wr(i));
    row.push_back(int(vn));
    row.push_back(int(vf));
    row.push_back(int(vs));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json trajectory_rows(const Trajectory& tr) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TrajectorySample& s : tr.samples) {
    nlohmann::json row = nlohmann::json::array();
    row.push_back(s.t);
    for (int i = 0; i < kStateDim; ++i) row.push_back(s.state(i));
    for (int i = 0; i < 6; ++i) row.push_back(s.control(i));
    for (int i = 0; i < 6; ++i) row.push_back(s.wrench(i));
    row.push_back(int(s.valid_normal));
    row.push_back(int(s.valid_friction));
    row.push_back(int(s.valid_spin));
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<double> to_std(const VecX& v) { return {v.data(), v.data() + v.size()}; }

inline nlohmann::json plan_to_json(const CollocationProblem& p, const IdcOptions& opt, const PlanResult& r) {
  nlohmann::json j;
  j["problem"] = {{"segments", p.segments},
                  {"t_f", p.t_f},
                  {"s_start", to_std(p.s_start)},
                  {"s_goal", to_std(p.s_goal)},
                  {"active_controls", p.active_controls()},
                  {"u_min", to_std(p.u_min)},
                  {"u_max", to_std(p.u_max)},
                  {"frozen_states", p.frozen},
                  {"eta", opt.eta},
                  {"max_iters", opt.max_iters}};
  nlohmann::json its = nlohmann::json::array();
  for (const IdcIteration& it : r.history) {
    its.push_back({{"segments", it.segments},
                   {"solve_seconds", it.solve_seconds},
                   {"nlp_status", to_string(it.nlp_status)},
                   {"func_evals", it.func_evals},
                   {"max_defect", it.max_defect},
                   {"objective", it.objective},
                   {"fine_error", std::isfinite(it.fine_error) ? nlohmann::json(it.fine_error) : nlohmann::json()},
                   {"fine_valid", it.fine_valid},
                   {"message", it.message}});
  }
  j["iterations"] = its;
  j["status"] = to_string(r.status);
  j["final_error"] = std::isfinite(r.final_error) ? nlohmann::json(r.final_error) : nlohmann::json();
  j["columns"] = csv_column_names();
  j["coarse"] = knot_rows(p.system, r.coarse);
  j["fine"] = trajectory_rows(r.fine);
  return j;
}

}  // namespace rolling

#endif  // ROLLING_PLANNER_HPP_
