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

#ifndef ROLLING_ERRORS_HPP_
#define ROLLING_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rolling {

// Root of every exception thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ROLLING_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// Chart coordinates outside the admissible box or inside a singularity margin.
ROLLING_DEFINE_ERROR(DomainError);
// Surface chart fails a construction or evaluation check (orthogonality, G).
ROLLING_DEFINE_ERROR(GeometryError);
// Relative curvature matrix is (numerically) singular.
ROLLING_DEFINE_ERROR(SingularGeometryError);
// Invalid physical or numerical parameter.
ROLLING_DEFINE_ERROR(ParameterError);
// State violates a kinematic constraint it is required to satisfy.
ROLLING_DEFINE_ERROR(ConstraintError);
// Dynamics linear system is ill-conditioned.
ROLLING_DEFINE_ERROR(SingularSystemError);
// Roll-pitch-yaw extraction or rate map at pitch = +-pi/2.
ROLLING_DEFINE_ERROR(GimbalError);
// Adaptive integrator step size collapsed.
ROLLING_DEFINE_ERROR(IntegrationError);
// Riccati solution grew without bound.
ROLLING_DEFINE_ERROR(BlowupError);
// A callback evaluated by an oracle or solver failed.
ROLLING_DEFINE_ERROR(EvaluationError);
// Nonlinear program could not reach feasibility.
ROLLING_DEFINE_ERROR(InfeasibleError);
// Nonlinear program exhausted its function-evaluation budget.
ROLLING_DEFINE_ERROR(EvalBudgetExceeded);
// Scenario or file input is malformed.
ROLLING_DEFINE_ERROR(InputError);

#undef ROLLING_DEFINE_ERROR

}  // namespace rolling

#endif  // ROLLING_ERRORS_HPP_
