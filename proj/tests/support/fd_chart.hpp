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

// Chart whose partial derivatives come from finite differences of a bare map.
// Test-only: too noisy in third order for simulation use.

#ifndef ROLLING_TESTS_SUPPORT_FD_CHART_HPP_
#define ROLLING_TESTS_SUPPORT_FD_CHART_HPP_

#include <array>
#include <functional>
#include <string>
#include <utility>

#include "rolling/surface.hpp"

namespace rolling::testing {

class FiniteDifferenceChart final : public SurfaceChart {
 public:
  using Map = std::function<Vec3(double, double)>;

  FiniteDifferenceChart(Map f, ChartDomain domain, double step = 1e-3)
      : f_(std::move(f)), h_(step) {
    domain_ = domain;
  }

  ChartDerivatives derivatives(const Vec2& u) const override {
    ChartDerivatives d;
    d.f = f_(u(0), u(1));
    d.fu = partial(u, 1, 0);
    d.fv = partial(u, 0, 1);
    d.fuu = partial(u, 2, 0);
    d.fuv = partial(u, 1, 1);
    d.fvv = partial(u, 0, 2);
    for (int m = 0; m < 4; ++m) d.f3[m] = partial(u, 3 - m, m);
    return d;
  }
  std::string name() const override { return "finite_difference"; }

 private:
  // Central stencils on offsets -2..2 for derivative orders 0..3.
  static constexpr std::array<std::array<double, 5>, 4> kStencil{{
      {0.0, 0.0, 1.0, 0.0, 0.0},
      {0.0, -0.5, 0.0, 0.5, 0.0},
      {0.0, 1.0, -2.0, 1.0, 0.0},
      {-0.5, 1.0, 0.0, -1.0, 0.5},
  }};

  Vec3 partial(const Vec2& u, int nu, int nv) const {
    Vec3 acc = Vec3::Zero();
    for (int i = 0; i < 5; ++i) {
      if (kStencil[nu][i] == 0.0) continue;
      for (int j = 0; j < 5; ++j) {
        if (kStencil[nv][j] == 0.0) continue;
        acc += kStencil[nu][i] * kStencil[nv][j] * f_(u(0) + (i - 2) * h_, u(1) + (j - 2) * h_);
      }
    }
    return acc / std::pow(h_, nu + nv);
  }

  Map f_;
  double h_;
};

}  // namespace rolling::testing

#endif  // ROLLING_TESTS_SUPPORT_FD_CHART_HPP_
