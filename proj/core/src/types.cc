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

#include "mpcgps/types.h"

#include <cmath>

namespace mpcgps {

Eigen::VectorXd State::ToVector() const {
  Eigen::VectorXd x(kStateDim);
  x.segment<3>(0) = position;
  x.segment<3>(3) = velocity;
  x(6) = orientation.w();
  x(7) = orientation.x();
  x(8) = orientation.y();
  x(9) = orientation.z();
  x.segment<3>(10) = angular_velocity;
  return x;
}

State State::FromVector(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != kStateDim) {
    throw ValidationError("state vector must have 13 entries, got " +
                          std::to_string(x.size()));
  }
  State s;
  s.position = x.segment<3>(0);
  s.velocity = x.segment<3>(3);
  s.orientation = Eigen::Quaterniond(x(6), x(7), x(8), x(9));
  s.angular_velocity = x.segment<3>(10);
  return s;
}

bool State::IsFinite() const {
  return position.allFinite() && velocity.allFinite() &&
         orientation.coeffs().allFinite() && angular_velocity.allFinite();
}

Eigen::Vector3d QuaternionLog(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Eigen::Vector3d xyz = q.vec();
  const double sin_half = xyz.norm();
  if (sin_half < 1e-12) return 2.0 * xyz;
  const double angle = 2.0 * std::atan2(sin_half, q.w());
  return xyz * (angle / sin_half);
}

Eigen::Quaterniond QuaternionExp(const Eigen::Vector3d& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotation_vector.x(),
                         0.5 * rotation_vector.y(), 0.5 * rotation_vector.z());
    return q.normalized();
  }
  const Eigen::Vector3d axis = rotation_vector / angle;
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
}

Eigen::VectorXd Retract(const State& reference,
                        const Eigen::Ref<const Eigen::VectorXd>& delta) {
  State s = reference;
  s.position += delta.segment<3>(0);
  s.velocity += delta.segment<3>(3);
  s.orientation =
      (reference.orientation * QuaternionExp(delta.segment<3>(6))).normalized();
  s.angular_velocity += delta.segment<3>(9);
  return s.ToVector();
}

Eigen::VectorXd Difference(const State& state, const State& reference) {
  Eigen::VectorXd d(kTangentDim);
  d.segment<3>(0) = state.position - reference.position;
  d.segment<3>(3) = state.velocity - reference.velocity;
  d.segment<3>(6) =
      QuaternionLog(reference.orientation.conjugate() * state.orientation);
  d.segment<3>(9) = state.angular_velocity - reference.angular_velocity;
  return d;
}

Eigen::VectorXd GlobalCoordinates(const State& state) {
  return Difference(state, State{});
}

Eigen::VectorXd RetractVector(const Eigen::Ref<const Eigen::VectorXd>& reference,
                              const Eigen::Ref<const Eigen::VectorXd>& delta) {
  return Retract(State::FromVector(reference), delta);
}

Eigen::VectorXd DifferenceVector(const Eigen::Ref<const Eigen::VectorXd>& state,
                                 const Eigen::Ref<const Eigen::VectorXd>& reference) {
  return Difference(State::FromVector(state), State::FromVector(reference));
}

}  // namespace mpcgps
