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

// Shared object/hand geometry pairs and random contact states.

#ifndef ROLLING_TESTS_SUPPORT_FIXTURES_HPP_
#define ROLLING_TESTS_SUPPORT_FIXTURES_HPP_

#include <numbers>
#include <string>
#include <vector>

#include "rolling/contact.hpp"
#include "support/random.hpp"

namespace rolling::testing {

struct NamedPair {
  std::string name;
  ContactPair pair;
  // Sampling boxes for random contact coordinates.
  Vec2 uo_lo, uo_hi, uh_lo, uh_hi;
};

inline NamedPair sphere_on_plane(double rho = 0.2) {
  using std::numbers::pi;
  return {"sphere_on_plane", {make_sphere(rho), make_plane()},
          Vec2(0.3, -pi), Vec2(pi - 0.3, pi), Vec2(-0.5, -0.5), Vec2(0.5, 0.5)};
}

// Convex sphere resting inside a concave spheroidal dish.
inline NamedPair sphere_in_dish() {
  using std::numbers::pi;
  return {"sphere_in_dish",
          {make_sphere(0.05), make_ellipsoid(Vec3(0.4, 0.25, 0.25), true)},
          Vec2(0.3, -pi), Vec2(pi - 0.3, pi), Vec2(1.2, 1.2), Vec2(1.95, 1.95)};
}

// Prolate spheroid inside the same dish.
inline NamedPair ellipsoid_in_dish() {
  using std::numbers::pi;
  return {"ellipsoid_in_dish",
          {make_ellipsoid(Vec3(0.05, 0.05, 0.08)), make_ellipsoid(Vec3(0.4, 0.25, 0.25), true)},
          Vec2(0.3, -pi), Vec2(pi - 0.3, pi), Vec2(1.2, 1.2), Vec2(1.95, 1.95)};
}

// Sphere on a convex spheroid.
inline NamedPair sphere_on_ellipsoid() {
  using std::numbers::pi;
  return {"sphere_on_ellipsoid",
          {make_sphere(0.1), make_ellipsoid(Vec3(0.2, 0.2, 0.3))},
          Vec2(0.3, -pi), Vec2(pi - 0.3, pi), Vec2(0.3, -pi), Vec2(pi - 0.3, pi)};
}

// Convex spheroid on a convex spheroid.
inline NamedPair ellipsoid_on_ellipsoid() {
  using std::numbers::pi;
  return {"ellipsoid_on_ellipsoid",
          {make_ellipsoid(Vec3(0.05, 0.05, 0.09)), make_ellipsoid(Vec3(0.3, 0.2, 0.2))},
          Vec2(0.3, -pi), Vec2(pi - 0.3, pi), Vec2(0.3, -pi), Vec2(pi - 0.3, pi)};
}

inline std::vector<NamedPair> all_pairs() {
  return {sphere_on_plane(), sphere_in_dish(), ellipsoid_in_dish(), sphere_on_ellipsoid(),
          ellipsoid_on_ellipsoid()};
}

inline ContactConfig random_config(Rng& rng, const NamedPair& p) {
  ContactConfig q;
  q.u_o = Vec2(rng.uniform(p.uo_lo(0), p.uo_hi(0)), rng.uniform(p.uo_lo(1), p.uo_hi(1)));
  q.u_h = Vec2(rng.uniform(p.uh_lo(0), p.uh_hi(0)), rng.uniform(p.uh_lo(1), p.uh_hi(1)));
  q.psi = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return q;
}

}  // namespace rolling::testing

#endif  // ROLLING_TESTS_SUPPORT_FIXTURES_HPP_
