// Copyright 2026 The mpcgps Authors
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

#ifndef MPCGPS_TYPES_H_
#define MPCGPS_TYPES_H_

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mpcgps {

// ----- dimensions ----- //

inline constexpr int kStateDim = 13;    // p, v, q (w, x, y, z), omega
inline constexpr int kTangentDim = 12;  // p, v, rotation vector, omega
inline constexpr int kActionDim = 4;    // rotor velocities
inline constexpr int kNumBeams = 30;
inline constexpr int kObservationDim = kNumBeams + 10;  // r, v, q, omega

using Action = Eigen::Matrix<double, kActionDim, 1>;
using ObservationVector = Eigen::Matrix<double, kObservationDim, 1>;

// ----- errors ----- //

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// invalid user-provided values (configs, specs, parameters)
class ValidationError : public Error {
 public:
  using Error::Error;
};

// non-finite state produced by the integrator
class SimulationDivergence : public Error {
 public:
  SimulationDivergence(const std::string& component, int index)
      : Error("simulation diverged: non-finite " + component + "[" +
              std::to_string(index) + "]"),
        component_(component),
        index_(index) {}

  const std::string& component() const { return component_; }
  int index() const { return index_; }

 private:
  std::string component_;
  int index_;
};

// trajectory optimizer could not produce a controller
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// ----- vehicle state ----- //

// Full rigid-body state. Velocity is expressed in the world frame and angular
// velocity in the body frame.
struct State {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();

  // packed as [p; v; qw qx qy qz; omega]
  Eigen::VectorXd ToVector() const;
  static State FromVector(const Eigen::Ref<const Eigen::VectorXd>& x);

  bool IsFinite() const;
};

// Rotation vector of a unit quaternion, with the sign chosen so w >= 0.
Eigen::Vector3d QuaternionLog(const Eigen::Quaterniond& q);
Eigen::Quaterniond QuaternionExp(const Eigen::Vector3d& rotation_vector);

// Tangent-space chart around a reference state. Orientation errors are body
// frame rotations: q = q_ref * Exp(delta).
Eigen::VectorXd Retract(const State& reference,
                        const Eigen::Ref<const Eigen::VectorXd>& delta);
Eigen::VectorXd Difference(const State& state, const State& reference);

// Global chart used for quantities pooled across time steps: (p, v, Log(q),
// omega) relative to the identity pose at the origin.
Eigen::VectorXd GlobalCoordinates(const State& state);

// packed-vector overloads
Eigen::VectorXd RetractVector(const Eigen::Ref<const Eigen::VectorXd>& reference,
                              const Eigen::Ref<const Eigen::VectorXd>& delta);
Eigen::VectorXd DifferenceVector(const Eigen::Ref<const Eigen::VectorXd>& state,
                                 const Eigen::Ref<const Eigen::VectorXd>& reference);

}  // namespace mpcgps

#endif  // MPCGPS_TYPES_H_
