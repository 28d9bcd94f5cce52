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

// Adaptive Dormand-Prince 5(4) integrator with 4th-order dense output. The
// local error test uses the max norm of the componentwise scaled error.
//
// Integrates in either time direction. After each accepted step an observer
// sees the dense segment, may overwrite the end state (projection) and may
// stop the integration. A right-hand side that throws rolling::Error on a
// trial stage causes the step to be retried with half the size; once the step
// collapses below `min_step` the last such error is rethrown.

#ifndef ROLLING_INTEGRATOR_HPP_
#define ROLLING_INTEGRATOR_HPP_

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "rolling/errors.hpp"

namespace rolling {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-10;
  long max_steps = 50'000'000;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

template <class Rhs, class Observer>
class DormandPrince;

// Continuous extension over one accepted step.
class DenseSegment {
 public:
  double t0 = 0.0, t1 = 0.0;

  Eigen::VectorXd eval(double t) const {
    const double th = (t - t0) / (t1 - t0);
    const double th1 = 1.0 - th;
    return r1_ + th * (r2_ + th1 * (r3_ + th * (r4_ + th1 * r5_)));
  }
  const Eigen::VectorXd& start() const { return r1_; }

 private:
  template <class Rhs, class Observer>
  friend class DormandPrince;
  Eigen::VectorXd r1_, r2_, r3_, r4_, r5_;
};

enum class StepAction { kContinue, kStop };

struct IntegrationResult {
  double t = 0.0;
  Eigen::VectorXd y;
  IntegrationStats stats;
  bool stopped = false;
};

template <class Rhs, class Observer>
class DormandPrince {
 public:
  DormandPrince(Rhs& f, Observer& obs, const IntegratorOptions& opt)
      : f_(f), obs_(obs), opt_(opt) {}

  IntegrationResult run(double t0, Eigen::VectorXd y, double t_end) {
    IntegrationResult res;
    res.t = t0;
    if (t_end == t0) {
      res.y = std::move(y);
      return res;
    }
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const double span = std::abs(t_end - t0);
    Eigen::VectorXd k1 = eval(t0, y, res.stats);
    double h = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(t0, y, k1, dir, res.stats);
    h = std::min({h, opt_.max_step, span});
    double t = t0;
    const long n = y.size();
    Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), y5(n), err(n);
    std::exception_ptr last_error;

    while (dir * (t_end - t) > 0.0) {
      if (res.stats.accepted + res.stats.rejected >= opt_.max_steps) {
        throw IntegrationError("integrator exceeded the maximum number of steps");
      }
      bool last = false;
      if (h >= std::abs(t_end - t) * (1.0 - 1e-12)) {
        h = std::abs(t_end - t);
        last = true;
      }
      if (h < opt_.min_step && !last) {
        if (last_error) std::rethrow_exception(last_error);
        std::ostringstream os;
        os << "step size collapsed to " << h << " s at t = " << t;
        throw IntegrationError(os.str());
      }
      const double hs = dir * h;
      double err_norm = 0.0;
      bool ok = true;
      try {
        ys = y + hs * (a21 * k1);
        k2 = eval(t + c2 * hs, ys, res.stats);
        ys = y + hs * (a31 * k1 + a32 * k2);
        k3 = eval(t + c3 * hs, ys, res.stats);
        ys = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = eval(t + c4 * hs, ys, res.stats);
        ys = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = eval(t + c5 * hs, ys, res.stats);
        ys = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = eval(t + hs, ys, res.stats);
        y5 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double t_new = last ? t_end : t + hs;
        k7 = eval(t_new, y5, res.stats);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double acc = 0.0;
        for (long i = 0; i < n; ++i) {
          const double sc = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
          acc = std::max(acc, std::abs(err(i)) / sc);
        }
        err_norm = acc;
        if (!std::isfinite(err_norm)) ok = false;
      } catch (const Error&) {
        last_error = std::current_exception();
        ok = false;
      }
      if (!ok) {
        ++res.stats.rejected;
        h *= 0.5;
        continue;
      }
      if (err_norm > 1.0) {
        ++res.stats.rejected;
        h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        continue;
      }
      // Accepted.
      last_error = nullptr;
      ++res.stats.accepted;
      const double t_new = last ? t_end : t + hs;
      DenseSegment seg;
      seg.t0 = t;
      seg.t1 = t_new;
      seg.r1_ = y;
      seg.r2_ = y5 - y;
      seg.r3_ = hs * k1 - seg.r2_;
      seg.r4_ = seg.r2_ - hs * k7 - seg.r3_;
      seg.r5_ = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      Eigen::VectorXd y_obs = y5;
      const StepAction action = obs_(seg, y_obs);
      t = t_new;
      if (action == StepAction::kStop) {
        res.t = t;
        res.y = std::move(y_obs);
        res.stopped = true;
        return res;
      }
      if (y_obs != y5) {
        y = std::move(y_obs);
        k1 = eval(t, y, res.stats);
      } else {
        y = y5;
        k1 = k7;
      }
      const double fac = err_norm == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 10.0);
      h = std::min(h * fac, opt_.max_step);
    }
    res.t = t;
    res.y = std::move(y);
    return res;
  }

 private:
  Eigen::VectorXd eval(double t, const Eigen::VectorXd& y, IntegrationStats& st) {
    ++st.rhs_evals;
    return f_(t, y);
  }

  double initial_step(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double dir,
                      IntegrationStats& st) {
    const long n = y0.size();
    auto norm = [&](const Eigen::VectorXd& v) {
      double acc = 0.0;
      for (long i = 0; i < n; ++i) {
        const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(y0(i));
        acc += (v(i) / sc) * (v(i) / sc);
      }
      return std::sqrt(acc / std::max<long>(n, 1));
    };
    const double d0 = norm(y0), d1n = norm(f0);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, opt_.max_step);
    double d2 = 0.0;
    try {
      const Eigen::VectorXd f1 = eval(t0 + dir * h0, y0 + dir * h0 * f0, st);
      d2 = norm(f1 - f0) / h0;
    } catch (const Error&) {
      return std::max(h0 * 1e-2, opt_.min_step * 10);
    }
    const double m = std::max(d1n, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    return std::max(std::min(100.0 * h0, h1), opt_.min_step * 10);
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  Rhs& f_;
  Observer& obs_;
  IntegratorOptions opt_;
};

// f: (t, y) -> dy/dt. observer: (const DenseSegment&, VectorXd& y_end) -> StepAction.
template <class Rhs, class Observer>
IntegrationResult integrate_dp45(Rhs&& f, double t0, const Eigen::VectorXd& y0, double t_end,
                                 const IntegratorOptions& opt, Observer&& observer) {
  DormandPrince<std::remove_reference_t<Rhs>, std::remove_reference_t<Observer>> dp(f, observer, opt);
  return dp.run(t0, y0, t_end);
}

template <class Rhs>
IntegrationResult integrate_dp45(Rhs&& f, double t0, const Eigen::VectorXd& y0, double t_end,
                                 const IntegratorOptions& opt) {
  auto noop = [](const DenseSegment&, Eigen::VectorXd&) { return StepAction::kContinue; };
  return integrate_dp45(f, t0, y0, t_end, opt, noop);
}

}  // namespace rolling

#endif  // ROLLING_INTEGRATOR_HPP_
