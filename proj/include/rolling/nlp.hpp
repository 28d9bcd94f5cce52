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


// Bound-constrained augmented-Lagrangian solver for nonlinear programs with a
// quadratic objective:
//
//   minimize   0.5 x'Hx + g'x + c0
//   subject to eq(x) = 0, ineq(x) <= 0, lower <= x <= upper.
//
// The outer loop follows the Powell-Hestenes-Rockafellar multiplier update
// with a penalty that grows only when feasibility stalls. Each subproblem is
// solved by a projected Levenberg-Marquardt method on the Gauss-Newton model
// of the augmented Lagrangian, using sparse LDL' factorizations.

#ifndef ROLLING_NLP_HPP_
#define ROLLING_NLP_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rolling/errors.hpp"
#include "rolling/geom3d.hpp"

namespace rolling {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Nlp {
  Eigen::Index n = 0;
  VecX lower, upper;  // +-infinity where unbounded
  SparseMatrix hessian;  // symmetric, both triangles stored
  VecX gradient;
  double constant = 0.0;
  Eigen::Index n_eq = 0;
  Eigen::Index n_ineq = 0;
  // Fills eq (n_eq) and ineq (n_ineq). May throw rolling::Error.
  std::function<void(const VecX& x, VecX& eq, VecX& ineq)> constraints;
  // Optional structured Jacobian; central differences on `constraints` when
  // empty. jacobian_cost is the number of evaluations charged per call.
  std::function<void(const VecX& x, SparseMatrix& j_eq, SparseMatrix& j_ineq)> jacobian;
  long jacobian_cost = 0;

  double objective(const VecX& x) const {
    return 0.5 * x.dot(hessian * x) + gradient.dot(x) + constant;
  }
  VecX objective_gradient(const VecX& x) const { return hessian * x + gradient; }

  void validate() const {
    if (n <= 0) throw ParameterError("Nlp: no variables");
    if (lower.size() != n || upper.size() != n || gradient.size() != n || hessian.rows() != n ||
        hessian.cols() != n) {
      throw ParameterError("Nlp: dimension mismatch");
    }
    if (((upper - lower).array() < 0.0).any()) throw ParameterError("Nlp: lower bound above upper bound");
    if ((n_eq > 0 || n_ineq > 0) && !constraints) throw ParameterError("Nlp: constraints callback missing");
  }
};

struct NlpOptions {
  double feasibility_tol = 1e-6;
  double optimality_tol = 1e-8;  // relative to the objective gradient scale
  long max_func_evals = 100'000;
  int max_outer = 60;
  int max_inner = 400;
  double fd_step = 1e-6;
  double initial_penalty = 10.0;
  double max_penalty = 1e14;
  bool throw_on_failure = true;
};

enum class NlpStatus { kConverged, kInfeasible, kBudgetExceeded, kMaxIterations };

inline const char* to_string(NlpStatus s) {
  switch (s) {
    case NlpStatus::kConverged: return "converged";
    case NlpStatus::kInfeasible: return "infeasible";
    case NlpStatus::kBudgetExceeded: return "eval_budget_exceeded";
    case NlpStatus::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

struct NlpResult {
  VecX x;
  bool converged = false;
  NlpStatus status = NlpStatus::kMaxIterations;
  double objective = 0.0;
  double max_violation = 0.0;
  double projected_gradient = 0.0;
  long func_evals = 0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double penalty = 0.0;
  VecX eq_multipliers, ineq_multipliers;
};

namespace detail {

struct BudgetHit {};

struct InnerOutcome {
  double projected_gradient = 0.0;
  double scale = 1.0;  // gradient scale of the objective and multiplier terms
  bool stalled = false;  // no merit decrease possible at working precision
};

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const Nlp& nlp, const NlpOptions& opt) : nlp_(nlp), opt_(opt) {}

  NlpResult solve(VecX x) {
    x = x.cwiseMax(nlp_.lower).cwiseMin(nlp_.upper);
    lam_ = VecX::Zero(nlp_.n_eq);
    mu_ = VecX::Zero(nlp_.n_ineq);
    double hmax = 1.0;
    for (int k = 0; k < nlp_.hessian.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(nlp_.hessian, k); it; ++it) hmax = std::max(hmax, std::abs(it.value()));
    }
    rho_ = opt_.initial_penalty * hmax;
    NlpResult res;
    res.x = x;
    try {
      evaluate(x, eq_, ineq_);
      const double gscale = 1.0 + nlp_.objective_gradient(x).lpNorm<Eigen::Infinity>();
      double omega_stop = opt_.optimality_tol * gscale;
      double omega = std::max(omega_stop, 1e-2 * gscale);
      double eta = std::max(opt_.feasibility_tol, 0.1);
      for (int outer = 0; outer < opt_.max_outer; ++outer) {
        res.outer_iterations = outer + 1;
        const InnerOutcome io = inner(x, omega, res.inner_iterations);
        const double pg = io.projected_gradient;
        omega_stop = std::max(omega_stop, opt_.optimality_tol * io.scale);
        const double v = violation(eq_, ineq_);
        res.x = x;
        res.max_violation = v;
        res.projected_gradient = pg;
        const bool at_floor = omega <= omega_stop * 1.0000001;
        if (v <= opt_.feasibility_tol && (pg <= omega_stop * 1.0000001 || (io.stalled && at_floor))) {
          res.status = NlpStatus::kConverged;
          break;
        }
        if (v <= std::max(eta, opt_.feasibility_tol)) {
          lam_ += rho_ * eq_;
          mu_ = (mu_ + rho_ * ineq_).cwiseMax(0.0);
          eta = std::max(0.1 * eta, 0.1 * opt_.feasibility_tol);
          omega = std::max(omega_stop, 1e-2 * omega);
        } else {
          rho_ *= 10.0;
          if (rho_ > opt_.max_penalty) {
            res.status = NlpStatus::kInfeasible;
            break;
          }
          eta = std::max(opt_.feasibility_tol, 0.5 * v);
          omega = std::max(omega_stop, std::min(omega, 1e-2 * gscale));
        }
        if (outer + 1 == opt_.max_outer) {
          res.status = v <= opt_.feasibility_tol ? NlpStatus::kMaxIterations : NlpStatus::kInfeasible;
        }
      }
    } catch (const BudgetHit&) {
      res.status = NlpStatus::kBudgetExceeded;
      res.x = x;
      res.max_violation = violation(eq_, ineq_);
    }
    res.converged = res.status == NlpStatus::kConverged;
    res.objective = nlp_.objective(res.x);
    res.func_evals = evals_;
    res.penalty = rho_;
    res.eq_multipliers = lam_;
    res.ineq_multipliers = mu_;
    return res;
  }

 private:
  void charge(long k) {
    evals_ += k;
    if (evals_ > opt_.max_func_evals) throw BudgetHit{};
  }

  void evaluate(const VecX& x, VecX& eq, VecX& ineq) {
    charge(1);
    eq.resize(nlp_.n_eq);
    ineq.resize(nlp_.n_ineq);
    if (nlp_.n_eq == 0 && nlp_.n_ineq == 0) return;
    nlp_.constraints(x, eq, ineq);
    if (eq.size() != nlp_.n_eq || ineq.size() != nlp_.n_ineq) {
      throw EvaluationError("Nlp: constraint callback returned wrong sizes");
    }
  }

  void jacobian(const VecX& x, SparseMatrix& je, SparseMatrix& ji) {
    if (nlp_.n_eq == 0 && nlp_.n_ineq == 0) {
      je.resize(0, nlp_.n);
      ji.resize(0, nlp_.n);
      return;
    }
    if (nlp_.jacobian) {
      charge(nlp_.jacobian_cost);
      nlp_.jacobian(x, je, ji);
      return;
    }
    std::vector<Triplet> te, ti;
    VecX xp = x, ep, ip, em, im;
    for (Eigen::Index j = 0; j < nlp_.n; ++j) {
      xp(j) = x(j) + opt_.fd_step;
      evaluate(xp, ep, ip);
      xp(j) = x(j) - opt_.fd_step;
      evaluate(xp, em, im);
      xp(j) = x(j);
      const double s = 0.5 / opt_.fd_step;
      for (Eigen::Index i = 0; i < nlp_.n_eq; ++i) {
        const double d = (ep(i) - em(i)) * s;
        if (d != 0.0) te.emplace_back(i, j, d);
      }
      for (Eigen::Index i = 0; i < nlp_.n_ineq; ++i) {
        const double d = (ip(i) - im(i)) * s;
        if (d != 0.0) ti.emplace_back(i, j, d);
      }
    }
    je.resize(nlp_.n_eq, nlp_.n);
    ji.resize(nlp_.n_ineq, nlp_.n);
    je.setFromTriplets(te.begin(), te.end());
    ji.setFromTriplets(ti.begin(), ti.end());
  }

  static double violation(const VecX& eq, const VecX& ineq) {
    double v = eq.size() ? eq.lpNorm<Eigen::Infinity>() : 0.0;
    for (Eigen::Index i = 0; i < ineq.size(); ++i) v = std::max(v, ineq(i));
    return v;
  }

  double merit(const VecX& x, const VecX& eq, const VecX& ineq) const {
    double m = nlp_.objective(x) + lam_.dot(eq) + 0.5 * rho_ * eq.squaredNorm();
    for (Eigen::Index i = 0; i < ineq.size(); ++i) {
      const double t = std::max(0.0, mu_(i) + rho_ * ineq(i));
      m += (t * t - mu_(i) * mu_(i)) / (2.0 * rho_);
    }
    return m;
  }

  double projected_gradient(const VecX& x, const VecX& g) const {
    return (x - (x - g).cwiseMax(nlp_.lower).cwiseMin(nlp_.upper)).lpNorm<Eigen::Infinity>();
  }

  // Projected Levenberg-Marquardt on the augmented Lagrangian.
  InnerOutcome inner(VecX& x, double omega, int& iterations) {
    const Eigen::Index n = nlp_.n;
    SparseMatrix je, ji;
    jacobian(x, je, ji);
    double phi = merit(x, eq_, ineq_);
    double nu = 1e-6;
    InnerOutcome out;
    out.projected_gradient = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < opt_.max_inner; ++it) {
      ++iterations;
      VecX t = (mu_ + rho_ * ineq_).cwiseMax(0.0);
      VecX g = nlp_.objective_gradient(x);
      out.scale = 1.0 + g.lpNorm<Eigen::Infinity>();
      if (nlp_.n_eq) {
        const VecX gl = je.transpose() * lam_;
        out.scale += gl.lpNorm<Eigen::Infinity>();
        g += gl + je.transpose() * (rho_ * eq_);
      }
      if (nlp_.n_ineq) g += ji.transpose() * t;
      out.projected_gradient = projected_gradient(x, g);
      if (out.projected_gradient <= omega) break;

      SparseMatrix hgn = nlp_.hessian;
      if (nlp_.n_eq) hgn += rho_ * SparseMatrix(je.transpose() * je);
      if (nlp_.n_ineq) {
        SparseMatrix ja = ji;
        VecX act = VecX::Zero(nlp_.n_ineq);
        for (Eigen::Index i = 0; i < nlp_.n_ineq; ++i) act(i) = t(i) > 0.0 ? 1.0 : 0.0;
        ja = act.asDiagonal() * ji;
        hgn += rho_ * SparseMatrix(ja.transpose() * ja);
      }
      std::vector<char> fixed(n, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double span = 1e-12 * (1.0 + std::abs(x(i)));
        if ((x(i) <= nlp_.lower(i) + span && g(i) > 0.0) || (x(i) >= nlp_.upper(i) - span && g(i) < 0.0)) {
          fixed[i] = 1;
        }
      }
      VecX diag = hgn.diagonal();
      const double dscale = std::max(1.0, diag.lpNorm<Eigen::Infinity>()) * 1e-12;

      bool accepted = false;
      for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
        std::vector<Triplet> trip;
        trip.reserve(hgn.nonZeros() + n);
        for (int k = 0; k < hgn.outerSize(); ++k) {
          for (SparseMatrix::InnerIterator itm(hgn, k); itm; ++itm) {
            if (!fixed[itm.row()] && !fixed[itm.col()]) trip.emplace_back(itm.row(), itm.col(), itm.value());
          }
        }
        VecX rhs = -g;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (fixed[i]) {
            trip.emplace_back(i, i, 1.0);
            rhs(i) = 0.0;
          } else {
            trip.emplace_back(i, i, nu * std::max(diag(i), dscale) + dscale);
          }
        }
        SparseMatrix m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(m);
        if (ldlt.info() != Eigen::Success) {
          nu = std::max(nu * 10.0, 1e-8);
          continue;
        }
        const VecX p = ldlt.solve(rhs);
        if (!p.allFinite()) {
          nu = std::max(nu * 10.0, 1e-8);
          continue;
        }
        const VecX xt = (x + p).cwiseMax(nlp_.lower).cwiseMin(nlp_.upper);
        const VecX d = xt - x;
        if (d.lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
          out.stalled = true;
          return out;
        }
        const double pred = -(g.dot(d) + 0.5 * d.dot(hgn * d));
        VecX et, it2;
        bool ok = true;
        try {
          evaluate(xt, et, it2);
        } catch (const BudgetHit&) {
          throw;
        } catch (const Error&) {
          ok = false;
        }
        const double phit = ok ? merit(xt, et, it2) : std::numeric_limits<double>::infinity();
        const double actual = phi - phit;
        if (ok && std::isfinite(phit) && pred > 0.0 && actual >= 1e-4 * pred) {
          const double r = actual / pred;
          nu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * r - 1.0, 3));
          nu = std::max(nu, 1e-12);
          stall = actual <= 1e-15 * std::abs(phi) ? stall + 1 : 0;
          x = xt;
          eq_ = std::move(et);
          ineq_ = std::move(it2);
          phi = phit;
          accepted = true;
        } else if (ok && std::isfinite(phit) && pred <= 0.0 &&
                   std::abs(actual) <= 1e-15 * (1.0 + std::abs(phi))) {
          // Model and merit agree on no further progress.
          out.stalled = true;
          return out;
        } else {
          nu = std::max(nu * 4.0, 1e-8);
        }
      }
      if (!accepted || stall >= 3) {
        out.stalled = true;
        return out;
      }
      jacobian(x, je, ji);
    }
    return out;
  }

  const Nlp& nlp_;
  NlpOptions opt_;
  VecX lam_, mu_, eq_, ineq_;
  double rho_ = 1.0;
  long evals_ = 0;
};

}  // namespace detail

// Solves `nlp` from `x0`. With opt.throw_on_failure, an infeasible outcome
// raises InfeasibleError and an exhausted budget raises EvalBudgetExceeded.
inline NlpResult solve_nlp(const Nlp& nlp, const VecX& x0, const NlpOptions& opt = {}) {
  nlp.validate();
  if (x0.size() != nlp.n) throw ParameterError("solve_nlp: initial guess has the wrong dimension");
  detail::AugmentedLagrangian al(nlp, opt);
  NlpResult r = al.solve(x0);
  if (opt.throw_on_failure) {
    std::ostringstream os;
    os << "solve_nlp: " << to_string(r.status) << " after " << r.func_evals
       << " evaluations, max violation " << r.max_violation;
    if (r.status == NlpStatus::kInfeasible) throw InfeasibleError(os.str());
    if (r.status == NlpStatus::kBudgetExceeded) throw EvalBudgetExceeded(os.str());
  }
  return r;
}

}  // namespace rolling

#endif  // ROLLING_NLP_HPP_
