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

// Orthogonally parameterized smooth surfaces and their local geometry.
//
// A chart maps (u, v) to a point on a body surface expressed in the body
// frame. Charts supply closed-form partial derivatives through third order;
// the contact kinematics need curvature derivatives, so C^3 is required.
//
// Sign convention: the second fundamental form is L_jk = F_jk . n with n the
// outward normal (x_c cross y_c normalized). A convex body therefore has a
// negative definite L and curvature form H.

#ifndef ROLLING_SURFACE_HPP_
#define ROLLING_SURFACE_HPP_

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>

#include "rolling/errors.hpp"
#include "rolling/geom3d.hpp"

namespace rolling {

// Partial derivatives of a chart map at one point. Third derivatives are
// indexed by the number of v-partials: f3[0] = F_uuu ... f3[3] = F_vvv.
struct ChartDerivatives {
  Vec3 f;
  Vec3 fu, fv;
  Vec3 fuu, fuv, fvv;
  std::array<Vec3, 4> f3;
};

// Admissible coordinate box. Infinite bounds mark unbounded (or periodic)
// directions; `margin` shrinks the finite bounds to stay clear of
// parameterization singularities.
struct ChartDomain {
  Vec2 lower{-std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  Vec2 upper{std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
  Vec2 margin{0.0, 0.0};
  // Finite window used for construction-time validation sampling.
  Vec2 sample_lower{-1.0, -1.0};
  Vec2 sample_upper{1.0, 1.0};

  bool contains(const Vec2& u) const {
    for (int i = 0; i < 2; ++i) {
      if (!std::isfinite(u(i))) return false;
      if (u(i) < lower(i) + margin(i) || u(i) > upper(i) - margin(i)) return false;
    }
    return true;
  }
  // Signed distance to the nearest margin-shrunk bound (negative outside).
  double clearance(const Vec2& u) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
      if (std::isfinite(lower(i))) d = std::min(d, u(i) - (lower(i) + margin(i)));
      if (std::isfinite(upper(i))) d = std::min(d, (upper(i) - margin(i)) - u(i));
    }
    return d;
  }
};

inline constexpr double kDefaultSingularityMargin = 1e-3;
inline constexpr double kOrthogonalityTolerance = 1e-9;

class SurfaceChart {
 public:
  virtual ~SurfaceChart() = default;

  // Raw derivatives; no domain check.
  virtual ChartDerivatives derivatives(const Vec2& u) const = 0;
  virtual std::string name() const = 0;

  const ChartDomain& domain() const { return domain_; }

  void require_in_domain(const Vec2& u) const {
    if (!domain_.contains(u)) {
      std::ostringstream os;
      os << name() << ": coordinates (" << u(0) << ", " << u(1)
         << ") outside the admissible domain";
      throw DomainError(os.str());
    }
  }

  // Checks orthogonality and regularity on a 32x32 grid of the sampling box.
  void validate() const {
    constexpr int kGrid = 32;
    const Vec2 lo = domain_.sample_lower, hi = domain_.sample_upper;
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        const Vec2 u(lo(0) + (hi(0) - lo(0)) * (i + 0.5) / kGrid,
                     lo(1) + (hi(1) - lo(1)) * (j + 0.5) / kGrid);
        if (!domain_.contains(u)) continue;
        const ChartDerivatives d = derivatives(u);
        const double g11 = d.fu.squaredNorm(), g22 = d.fv.squaredNorm();
        const double g12 = d.fu.dot(d.fv);
        if (d.fu.norm() <= 1e-9 || d.fv.norm() <= 1e-9) {
          throw GeometryError(name() + ": degenerate coordinate tangent inside domain");
        }
        if (std::abs(g12) / std::hypot(g11, g22) > kOrthogonalityTolerance) {
          std::ostringstream os;
          os << name() << ": chart is not orthogonal (|g12|/|G| = "
             << std::abs(g12) / std::hypot(g11, g22) << " at (" << u(0) << ", "
             << u(1) << "))";
          throw GeometryError(os.str());
        }
      }
    }
  }

 protected:
  ChartDomain domain_;
};

using ChartPtr = std::shared_ptr<const SurfaceChart>;

// F(u, v) = (u, v, 0).
class PlaneChart final : public SurfaceChart {
 public:
  PlaneChart() = default;

  ChartDerivatives derivatives(const Vec2& u) const override {
    ChartDerivatives d;
    d.f = Vec3(u(0), u(1), 0.0);
    d.fu = Vec3::UnitX();
    d.fv = Vec3::UnitY();
    d.fuu = d.fuv = d.fvv = Vec3::Zero();
    d.f3.fill(Vec3::Zero());
    return d;
  }
  std::string name() const override { return "plane"; }
};

// Spheroid / sphere chart with the polar angle u in (0, pi) and azimuth v.
// In a local frame whose z-axis is the polar axis:
//   F(u, v) = (A sin u cos v, B sin u sin v, C cos u).
// The local frame is a cyclic relabelling of the body axes so the polar axis
// can be x, y or z. With `inward` the azimuth is reversed, flipping the
// normal so the inside of the shell (a dish) faces the contact.
class EllipsoidChart final : public SurfaceChart {
 public:
  enum class PolarAxis { kX, kY, kZ };

  EllipsoidChart(const Vec3& semi_axes, PolarAxis pole, bool inward,
                 double margin)
      : semi_axes_(semi_axes), pole_(pole), inward_(inward) {
    // Local x, y, z map to body axes perm_[0..2].
    switch (pole) {
      case PolarAxis::kZ: perm_ = {0, 1, 2}; break;
      case PolarAxis::kX: perm_ = {1, 2, 0}; break;
      case PolarAxis::kY: perm_ = {2, 0, 1}; break;
    }
    a_ = semi_axes(perm_[0]);
    b_ = semi_axes(perm_[1]);
    c_ = semi_axes(perm_[2]);
    domain_.lower = Vec2(0.0, -std::numeric_limits<double>::infinity());
    domain_.upper = Vec2(std::numbers::pi, std::numeric_limits<double>::infinity());
    domain_.margin = Vec2(margin, 0.0);
    domain_.sample_lower = Vec2(0.0, -std::numbers::pi);
    domain_.sample_upper = Vec2(std::numbers::pi, std::numbers::pi);
  }

  ChartDerivatives derivatives(const Vec2& uv) const override {
    const double u = uv(0);
    const double v = inward_ ? -uv(1) : uv(1);
    const double su = std::sin(u), cu = std::cos(u);
    const double sv = std::sin(v), cv = std::cos(v);
    const double a = a_, b = b_, c = c_;
    ChartDerivatives l;
    l.f = Vec3(a * su * cv, b * su * sv, c * cu);
    l.fu = Vec3(a * cu * cv, b * cu * sv, -c * su);
    l.fv = Vec3(-a * su * sv, b * su * cv, 0.0);
    l.fuu = Vec3(-a * su * cv, -b * su * sv, -c * cu);
    l.fuv = Vec3(-a * cu * sv, b * cu * cv, 0.0);
    l.fvv = Vec3(-a * su * cv, -b * su * sv, 0.0);
    l.f3[0] = Vec3(-a * cu * cv, -b * cu * sv, c * su);
    l.f3[1] = Vec3(a * su * sv, -b * su * cv, 0.0);
    l.f3[2] = Vec3(-a * cu * cv, -b * cu * sv, 0.0);
    l.f3[3] = Vec3(a * su * sv, -b * su * cv, 0.0);
    if (inward_) {
      // d/dv of F(u, -v) flips every odd-order v-partial.
      l.fv = -l.fv;
      l.fuv = -l.fuv;
      l.f3[1] = -l.f3[1];
      l.f3[3] = -l.f3[3];
    }
    ChartDerivatives d;
    d.f = to_body(l.f);
    d.fu = to_body(l.fu);
    d.fv = to_body(l.fv);
    d.fuu = to_body(l.fuu);
    d.fuv = to_body(l.fuv);
    d.fvv = to_body(l.fvv);
    for (int i = 0; i < 4; ++i) d.f3[i] = to_body(l.f3[i]);
    return d;
  }

  std::string name() const override {
    std::ostringstream os;
    os << (inward_ ? "ellipsoid_dish(" : "ellipsoid(") << semi_axes_(0) << ", "
       << semi_axes_(1) << ", " << semi_axes_(2) << ")";
    return os.str();
  }

  const Vec3& semi_axes() const { return semi_axes_; }
  PolarAxis pole() const { return pole_; }
  bool inward() const { return inward_; }

 private:
  Vec3 to_body(const Vec3& local) const {
    Vec3 out;
    for (int i = 0; i < 3; ++i) out(perm_[i]) = local(i);
    return out;
  }

  Vec3 semi_axes_;
  PolarAxis pole_;
  bool inward_;
  std::array<int, 3> perm_{0, 1, 2};
  double a_ = 0, b_ = 0, c_ = 0;
};

inline ChartPtr make_plane() { return std::make_shared<PlaneChart>(); }

// Sphere F = r (sin u cos v, sin u sin v, cos u) with 0 < u < pi.
inline ChartPtr make_sphere(double radius,
                            double margin = kDefaultSingularityMargin) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("make_sphere: radius must be positive");
  }
  auto chart = std::make_shared<EllipsoidChart>(
      Vec3::Constant(radius), EllipsoidChart::PolarAxis::kZ, false, margin);
  chart->validate();
  return chart;
}

// Ellipsoid with the given body-frame semi-axes. The polar axis is the
// distinct axis of a spheroid (z when all three are equal). A triaxial
// ellipsoid has no orthogonal angular chart and is rejected by validation.
inline ChartPtr make_ellipsoid(const Vec3& semi_axes, bool inward = false,
                               double margin = kDefaultSingularityMargin) {
  if (!(semi_axes.minCoeff() > 0.0) || !semi_axes.allFinite()) {
    throw ParameterError("make_ellipsoid: semi-axes must be positive");
  }
  using Axis = EllipsoidChart::PolarAxis;
  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-15 * std::max(std::abs(x), std::abs(y));
  };
  Axis pole = Axis::kZ;
  if (close(semi_axes(1), semi_axes(2)) && !close(semi_axes(0), semi_axes(1))) {
    pole = Axis::kX;
  } else if (close(semi_axes(0), semi_axes(2)) && !close(semi_axes(0), semi_axes(1))) {
    pole = Axis::kY;
  }
  auto chart = std::make_shared<EllipsoidChart>(semi_axes, pole, inward, margin);
  chart->validate();
  return chart;
}

// Local surface geometry at one chart point.
struct LocalGeometry {
  Vec3 point;
  Rotation gauss;       // [x/|x|, y/|y|, n] in the body frame
  Mat2 G;               // metric tensor
  Mat2 sqrtG;           // diag(sqrt(g11), sqrt(g22))
  Mat2 sqrtG_inv;
  Mat2 L;               // second fundamental form F_jk . n
  Mat2 H;               // sqrtG^-1 L sqrtG^-1
  double sigma = 1.0;   // sqrt(g22 / g11)
  // christoffel[l][j][k] = Gamma^l_jk (second kind), indices 0 = u, 1 = v.
  double christoffel[2][2][2] = {};
  Eigen::RowVector2d gamma;                // [G^2_11, G^2_12]
  Eigen::Matrix<double, 2, 3> gamma_bar;   // rows [G^l_11, 2 G^l_12, G^l_22]
  Eigen::RowVector3d L_bar;                // [L11, 2 L12, L22]
  Eigen::RowVector3d gamma_bbar;           // time derivative of sigma*Gamma*u'
  Eigen::Matrix<double, 2, 3> L_bbar;
};

inline Rotation gauss_frame_from(const ChartDerivatives& d) {
  const Vec3 n = d.fu.cross(d.fv).normalized();
  Rotation r;
  r.col(0) = d.fu.normalized();
  r.col(1) = d.fv.normalized();
  r.col(2) = n;
  return r;
}

inline Rotation gauss_frame(const SurfaceChart& chart, const Vec2& u) {
  chart.require_in_domain(u);
  return gauss_frame_from(chart.derivatives(u));
}

inline LocalGeometry local_geometry(const SurfaceChart& chart, const Vec2& u) {
  chart.require_in_domain(u);
  const ChartDerivatives d = chart.derivatives(u);
  LocalGeometry g;
  g.point = d.f;
  g.gauss = gauss_frame_from(d);
  const Vec3 n = g.gauss.col(2);

  const double g11 = d.fu.squaredNorm(), g22 = d.fv.squaredNorm();
  const double g12 = d.fu.dot(d.fv);
  g.G << g11, g12, g12, g22;
  if (!(g11 > 0.0) || !(g22 > 0.0) || g11 * g22 - g12 * g12 <= 0.0) {
    throw GeometryError(chart.name() + ": metric tensor not positive definite");
  }
  g.sqrtG = Vec2(std::sqrt(g11), std::sqrt(g22)).asDiagonal();
  g.sqrtG_inv = Vec2(1.0 / std::sqrt(g11), 1.0 / std::sqrt(g22)).asDiagonal();
  g.sigma = std::sqrt(g22 / g11);

  const Vec3* second[2][2] = {{&d.fuu, &d.fuv}, {&d.fuv, &d.fvv}};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) g.L(j, k) = second[j][k]->dot(n);
  g.H = g.sqrtG_inv * g.L * g.sqrtG_inv;

  const Mat2 Ginv = g.G.inverse();
  const Vec3* basis[2] = {&d.fu, &d.fv};
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int m = 0; m < 2; ++m) s += second[j][k]->dot(*basis[m]) * Ginv(m, l);
        g.christoffel[l][j][k] = s;
      }
  const auto& C = g.christoffel;
  g.gamma << C[1][0][0], C[1][0][1];
  g.gamma_bar << C[0][0][0], 2.0 * C[0][0][1], C[0][1][1],  //
      C[1][0][0], 2.0 * C[1][0][1], C[1][1][1];
  g.L_bar << g.L(0, 0), 2.0 * g.L(0, 1), g.L(1, 1);

  // Third-order terms. F_jkm with m counting v-partials.
  auto third = [&d](int j, int k, int m) -> const Vec3& {
    return d.f3[j + k + m];
  };
  // d(Gamma^2_jk)/du_m for an orthogonal chart: Gamma^2_jk = F_jk.y / g22.
  auto dgy = [&](int j, int k, int m) {
    const Vec3& fjk = *second[j][k];
    const Vec3& fvm = *second[1][m];  // d y / d u_m
    const double num = fjk.dot(d.fv);
    const double dnum = third(j, k, m).dot(d.fv) + fjk.dot(fvm);
    const double dg22 = 2.0 * d.fv.dot(fvm);
    return dnum / g22 - num * dg22 / (g22 * g22);
  };
  const double dG2_11_u = dgy(0, 0, 0), dG2_11_v = dgy(0, 0, 1);
  const double dG2_12_u = dgy(0, 1, 0), dG2_12_v = dgy(0, 1, 1);
  g.gamma_bbar << (C[1][1][0] - C[0][0][0]) * C[1][0][0] + dG2_11_u,
      (C[1][1][0] - C[0][0][0]) * C[1][0][1] + (C[1][1][1] - C[0][0][1]) * C[1][0][0] +
          dG2_12_u + dG2_11_v,
      (C[1][1][1] - C[0][0][1]) * C[1][0][1] + dG2_12_v;

  // dL_jk/du_m = F_jkm . n - sum_p L_mp Gamma^p_jk (Weingarten).
  auto dL = [&](int j, int k, int m) {
    return third(j, k, m).dot(n) - g.L(m, 0) * C[0][j][k] - g.L(m, 1) * C[1][j][k];
  };
  const Mat2& L = g.L;
  g.L_bbar << C[0][0][0] * L(0, 0) - dL(0, 0, 0),
      C[0][0][0] * L(0, 1) + C[0][0][1] * L(0, 0) - dL(0, 1, 0) - dL(0, 0, 1),
      C[0][0][1] * L(0, 1) - dL(0, 1, 1),
      C[1][1][0] * L(1, 0) - dL(1, 0, 0),
      C[1][1][0] * L(1, 1) + C[1][1][1] * L(1, 0) - dL(1, 1, 0) - dL(1, 0, 1),
      C[1][1][1] * L(1, 1) - dL(1, 1, 1);
  return g;
}

}  // namespace rolling

#endif  // ROLLING_SURFACE_HPP_
