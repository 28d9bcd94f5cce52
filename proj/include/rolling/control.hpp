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


// Finite-horizon LQR about a nominal trajectory.
//
// The Riccati equation
//   -dP/dt = P A + A'P - P B R^-1 B'P + Q,   P(t_f) = P1
// is integrated backward with the adaptive Dormand-Prince integrator, with
// A(t), B(t) obtained by central differences of the dynamics along the
// interpolated nominal. Gains K = R^-1 B'P are stored on a uniform grid and
// interpolated linearly.

#ifndef ROLLING_CONTROL_HPP_
#define ROLLING_CONTROL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/errors.hpp"
#include "rolling/integrator.hpp"
#include "rolling/planner.hpp"

namespace rolling {

inline constexpr double kRiccatiBlowup = 1e12;

// State entries that are angles: roll, pitch, yaw and psi.
inline constexpr std::array<int, 4> kAngleStates{state_index::kRpy, state_index::kRpy + 1,
                                                 state_index::kRpy + 2, state_index::kQ + 4};

// Removes 2 pi jumps in the angle entries so consecutive states differ by
// less than pi.
inline void unwrap_angles(std::vector<StateVector>& s) {
  for (size_t k = 1; k < s.size(); ++k) {
    for (int i : kAngleStates) {
      const double d = s[k](i) - s[k - 1](i);
      s[k](i) -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    }
  }
}

// Nominal state and control with cubic Hermite state interpolation and
// piecewise-linear controls.
class NominalTrajectory {
 public:
  NominalTrajectory() = default;

  NominalTrajectory(std::vector<double> t, std::vector<StateVector> s, std::vector<StateVector> sdot,
                    std::vector<Vec6> u)
      : t_(std::move(t)), s_(std::move(s)), sdot_(std::move(sdot)), u_(std::move(u)) {
    if (t_.size() < 2 || s_.size() != t_.size() || sdot_.size() != t_.size() || u_.size() != t_.size()) {
      throw ParameterError("NominalTrajectory: need matching arrays with at least two samples");
    }
    for (size_t k = 1; k < t_.size(); ++k) {
      if (!(t_[k] > t_[k - 1])) throw ParameterError("NominalTrajectory: times must increase");
    }
    unwrap_angles(s_);
  }

  // Knots of a collocated plan; derivatives from the rolling dynamics.
  static NominalTrajectory from_knots(const RollingSystem& sys, const KnotTrajectory& k) {
    std::vector<StateVector> d;
    for (int j = 0; j < k.size(); ++j) d.push_back(state_derivative(sys, k.s[j], k.u[j], nullptr, false));
    return {k.t, k.s, d, k.u};
  }

  // Samples of a simulated trajectory.
  static NominalTrajectory from_trajectory(const RollingSystem& sys, const Trajectory& tr) {
    std::vector<double> t;
    std::vector<StateVector> s, d;
    std::vector<Vec6> u;
    for (const TrajectorySample& smp : tr.samples) {
      if (!t.empty() && !(smp.t > t.back())) continue;
      t.push_back(smp.t);
      s.push_back(smp.state);
      u.push_back(smp.control);
      d.push_back(state_derivative(sys, smp.state, smp.control, nullptr, false));
    }
    return {t, s, d, u};
  }

  double t0() const { return t_.front(); }
  double t_f() const { return t_.back(); }
  const std::vector<double>& times() const { return t_; }

  StateVector state(double t) const {
    const auto [k, a] = locate(t);
    const double h = t_[k + 1] - t_[k];
    const double a2 = a * a, a3 = a2 * a;
    return (2 * a3 - 3 * a2 + 1) * s_[k] + (a3 - 2 * a2 + a) * h * sdot_[k] + (-2 * a3 + 3 * a2) * s_[k + 1] +
           (a3 - a2) * h * sdot_[k + 1];
  }
  Vec6 control(double t) const {
    const auto [k, a] = locate(t);
    return (1.0 - a) * u_[k] + a * u_[k + 1];
  }

 private:
  std::pair<size_t, double> locate(double t) const {
    if (t <= t_.front()) return {0, 0.0};
    if (t >= t_.back()) return {t_.size() - 2, 1.0};
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const size_t k = static_cast<size_t>(it - t_.begin()) - 1;
    return {k, (t - t_[k]) / (t_[k + 1] - t_[k])};
  }

  std::vector<double> t_;
  std::vector<StateVector> s_, sdot_;
  std::vector<Vec6> u_;
};

struct Linearization {
  MatX A, B;
};

// Central-difference Jacobians of f(x, u) at (x, u).
inline Linearization linearize(const std::function<VecX(const VecX&, const VecX&)>& f, const VecX& x,
                               const VecX& u, double step = 1e-6) {
  Linearization lin;
  const VecX f0 = f(x, u);
  lin.A.resize(f0.size(), x.size());
  lin.B.resize(f0.size(), u.size());
  VecX xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + step;
    const VecX fp = f(xp, u);
    xp(j) = x(j) - step;
    const VecX fm = f(xp, u);
    xp(j) = x(j);
    lin.A.col(j) = (fp - fm) / (2.0 * step);
  }
  VecX up = u;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    up(j) = u(j) + step;
    const VecX fp = f(x, up);
    up(j) = u(j) - step;
    const VecX fm = f(x, up);
    up(j) = u(j);
    lin.B.col(j) = (fp - fm) / (2.0 * step);
  }
  return lin;
}

inline std::vector<int> active_indices(const std::array<bool, 6>& mask) {
  std::vector<int> out;
  for (int i = 0; i < 6; ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

// Rolling dynamics linearized in the state and the active hand accelerations.
inline Linearization linearize(const RollingSystem& sys, const StateVector& s, const Vec6& u,
                               const std::array<bool, 6>& mask, double step = 1e-6) {
  const std::vector<int> act = active_indices(mask);
  VecX ua(static_cast<Eigen::Index>(act.size()));
  for (size_t i = 0; i < act.size(); ++i) ua(static_cast<Eigen::Index>(i)) = u(act[i]);
  auto f = [&](const VecX& x, const VecX& v) -> VecX {
    Vec6 full = u;
    for (size_t i = 0; i < act.size(); ++i) full(act[i]) = v(static_cast<Eigen::Index>(i));
    return state_derivative(sys, StateVector(x), full, nullptr, false);
  };
  return linearize(f, s, ua, step);
}

struct LqrWeights {
  MatX P1, Q, R;

  void validate(Eigen::Index n, Eigen::Index m) const {
    if (P1.rows() != n || Q.rows() != n || R.rows() != m) throw ParameterError("LQR weight dimensions");
    require_psd(P1, "P1_LQR", 1e-10);
    require_psd(Q, "Q_LQR", 1e-10);
    require_psd(R, "R_LQR", 1e-10);
    const Eigen::SelfAdjointEigenSolver<MatX> es(R);
    if (m > 0 && es.eigenvalues().minCoeff() <= 0.0) throw ParameterError("R_LQR must be positive definite");
  }
};

struct GainSchedule {
  std::vector<double> t;
  std::vector<MatX> K;  // n_u x n
  std::vector<MatX> P;  // n x n
  std::array<bool, 6> mask{true, true, true, true, true, true};

  MatX gain(double time) const {
    if (t.empty()) throw ParameterError("GainSchedule: empty");
    if (time <= t.front()) return K.front();
    if (time >= t.back()) return K.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin()) - 1;
    const double a = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - a) * K[k] + a * K[k + 1];
  }
};

struct RiccatiOptions {
  // Finite-difference noise in A and B sets the useful accuracy floor.
  IntegratorOptions integrator{1e-6, 1e-8};
  double sample_dt = 0.01;
};

// Backward Riccati sweep over [t0, t_f] for time-varying (A(t), B(t)).
inline GainSchedule riccati_backward(const std::function<Linearization(double)>& ab, double t0, double t_f,
                                     const LqrWeights& w, const RiccatiOptions& opt = {}) {
  if (!(t_f > t0)) throw ParameterError("riccati_backward: empty horizon");
  const Linearization l0 = ab(t_f);
  const Eigen::Index n = l0.A.rows(), m = l0.B.cols();
  w.validate(n, m);
  const MatX r_inv = w.R.inverse();
  auto pack = [n](const MatX& p) { return VecX(Eigen::Map<const VecX>(p.data(), n * n)); };
  auto unpack = [n](const VecX& y) { return MatX(Eigen::Map<const MatX>(y.data(), n, n)); };
  auto check = [](const MatX& p, double t) {
    if (!p.allFinite() || p.norm() > kRiccatiBlowup) {
      std::ostringstream os;
      os << "riccati_backward: |P| exceeded " << kRiccatiBlowup << " at t = " << t;
      throw BlowupError(os.str());
    }
  };
  auto rhs = [&](double t, const VecX& y) -> VecX {
    const MatX p = unpack(y);
    check(p, t);
    const Linearization l = ab(t);
    const MatX pb = p * l.B;
    const MatX dp = -(p * l.A + l.A.transpose() * p - pb * r_inv * pb.transpose() + w.Q);
    return pack(dp);
  };

  GainSchedule g;
  const int n_samples = std::max(1, static_cast<int>(std::ceil((t_f - t0) / opt.sample_dt - 1e-9)));
  std::vector<double> grid(n_samples + 1);
  for (int i = 0; i <= n_samples; ++i) grid[i] = i == n_samples ? t_f : t0 + i * (t_f - t0) / n_samples;
  std::vector<MatX> ps(grid.size());
  ps.back() = w.P1;
  int next = n_samples - 1;  // next grid index to fill, walking backward
  auto store = [&](const MatX& p, int idx) { ps[idx] = 0.5 * (p + p.transpose()); };
  auto observer = [&](const DenseSegment& seg, VecX& y_end) {
    while (next >= 0 && grid[next] >= seg.t1 - 1e-12 * (t_f - t0)) {
      store(unpack(seg.eval(std::max(grid[next], seg.t1))), next);
      --next;
    }
    MatX p = unpack(y_end);
    check(p, seg.t1);
    p = 0.5 * (p + p.transpose());
    y_end = pack(p);
    return StepAction::kContinue;
  };
  integrate_dp45(rhs, t_f, pack(w.P1), t0, opt.integrator, observer);
  for (; next >= 0; --next) store(ps[next + 1], next);
  g.t = grid;
  g.P = ps;
  for (size_t i = 0; i < grid.size(); ++i) g.K.push_back(r_inv * ab(grid[i]).B.transpose() * ps[i]);
  return g;
}

// Rolling LQR about `nom` for the active controls in `mask`.
inline GainSchedule riccati_backward(const RollingSystem& sys, const NominalTrajectory& nom,
                                     const LqrWeights& w, const std::array<bool, 6>& mask,
                                     const RiccatiOptions& opt = {}) {
  auto ab = [&](double t) { return linearize(sys, nom.state(t), nom.control(t), mask); };
  GainSchedule g = riccati_backward(ab, nom.t0(), nom.t_f(), w, opt);
  g.mask = mask;
  return g;
}

// u = u_nom(t) - K(t) (s - s_nom(t)) on the active controls.
inline Vec6 feedback(const StateVector& s, double t, const NominalTrajectory& nom, const GainSchedule& g) {
  Vec6 u = nom.control(t);
  const VecX du = g.gain(t) * (s - nom.state(t));
  const std::vector<int> act = active_indices(g.mask);
  for (size_t i = 0; i < act.size(); ++i) u(act[i]) -= du(static_cast<Eigen::Index>(i));
  return u;
}

struct ClosedLoopResult {
  Trajectory trajectory;
  std::vector<double> deviation;  // |s(t) - s_nom(t)| per sample
  double final_deviation() const { return deviation.empty() ? 0.0 : deviation.back(); }
};

inline std::vector<double> deviations(const Trajectory& tr, const NominalTrajectory& nom) {
  std::vector<double> d;
  for (const TrajectorySample& s : tr.samples) d.push_back((s.state - nom.state(s.t)).norm());
  return d;
}

inline ClosedLoopResult closed_loop_simulate(const RollingSystem& sys, const RollingState& s0,
                                             const NominalTrajectory& nom, const GainSchedule& g,
                                             const SimulationOptions& opt = {}) {
  const ControlLaw law = [&nom, &g](double t, const StateVector& s) { return feedback(s, t, nom, g); };
  ClosedLoopResult r;
  r.trajectory = simulate(sys, s0, law, nom.t_f(), opt);
  r.deviation = deviations(r.trajectory, nom);
  return r;
}

inline ClosedLoopResult open_loop_simulate(const RollingSystem& sys, const RollingState& s0,
                                           const NominalTrajectory& nom, const SimulationOptions& opt = {}) {
  const ControlLaw law = [&nom](double t, const StateVector&) { return nom.control(t); };
  ClosedLoopResult r;
  r.trajectory = simulate(sys, s0, law, nom.t_f(), opt);
  r.deviation = deviations(r.trajectory, nom);
  return r;
}

// Times plus row-major gain matrices.
inline nlohmann::json gains_to_json(const GainSchedule& g) {
  nlohmann::json j;
  j["times"] = g.t;
  j["active_controls"] = active_indices(g.mask);
  j["rows"] = g.K.empty() ? 0 : g.K.front().rows();
  j["cols"] = g.K.empty() ? 0 : g.K.front().cols();
  nlohmann::json ks = nlohmann::json::array();
  for (const MatX& k : g.K) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      for (Eigen::Index c = 0; c < k.cols(); ++c) flat.push_back(k(r, c));
    }
    ks.push_back(flat);
  }
  j["K"] = ks;
  return j;
}

}  // namespace rolling

#endif  // ROLLING_CONTROL_HPP_
