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

#ifndef MPCGPS_DYNAMICS_H_
#define MPCGPS_DYNAMICS_H_

#include <optional>

#include <Eigen/Core>

#include "mpcgps/types.h"

namespace mpcgps {

// Local linear-Gaussian model of one transition,
//   dx' = fx * dx + fu * du + fc + w,   w ~ N(0, noise),
// where dx is the deviation from the linearization point expressed in its
// tangent chart, and dx' the deviation from the chart of the next state.
// When the next chart is the image of the linearization point, fc = 0.
struct LinearDynamics {
  Eigen::MatrixXd fx;
  Eigen::MatrixXd fu;
  Eigen::VectorXd fc;
  Eigen::MatrixXd noise;
};

// Discrete-time system used by the trajectory optimizer. States live in an
// ambient representation of size state_dim(); deviations live in a tangent
// space of size tangent_dim().
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int state_dim() const = 0;
  virtual int tangent_dim() const = 0;
  virtual int action_dim() const = 0;

  // Mean transition. Throws SimulationDivergence on non-finite output.
  virtual Eigen::VectorXd Step(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) const = 0;

  virtual Eigen::VectorXd Retract(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& delta) const {
    return x + delta;
  }
  virtual Eigen::VectorXd Difference(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& reference) const {
    return x - reference;
  }

  virtual Eigen::MatrixXd ProcessNoise() const = 0;

  // Central finite differences of Step in the tangent charts. If next_chart
  // is null the image Step(x, u) is used and fc is zero.
  virtual LinearDynamics Linearize(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u,
                                   const Eigen::VectorXd* next_chart = nullptr) const;

  double finite_difference_step = 1e-5;
};

// x' = A x + B u + c; used for linear-quadratic problems.
class LinearModel : public SystemModel {
 public:
  LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::VectorXd c,
              Eigen::MatrixXd noise);
  LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b);

  int state_dim() const override { return a_.rows(); }
  int tangent_dim() const override { return a_.rows(); }
  int action_dim() const override { return b_.cols(); }

  Eigen::VectorXd Step(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) const override;
  Eigen::MatrixXd ProcessNoise() const override { return noise_; }
  LinearDynamics Linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const Eigen::VectorXd* next_chart) const override;

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd noise_;
};

// ----- quadrotor ----- //

// X-configuration quadrotor. Rotor i sits at angle 45 + 90 i degrees from the
// body x axis: 0 front-left, 1 rear-left, 2 rear-right, 3 front-right.
struct VehicleParams {
  double mass = 1.5;                                 // kg
  Eigen::Vector3d inertia{0.029, 0.029, 0.055};      // kg m^2, diagonal
  double arm_length = 0.22;                          // m, center to rotor
  double thrust_coefficient = 8.0e-6;                // N / (rad/s)^2
  double torque_coefficient = 1.2e-7;                // N m / (rad/s)^2
  double linear_drag = 0.01;                         // N / (m/s)
  Eigen::Vector4d rotor_gains = Eigen::Vector4d::Ones();
  double gravity = 9.81;                             // m/s^2
  // Upper actuator limit in rad/s; <= 0 selects 3 * hover velocity.
  double max_rotor_velocity = 0.0;

  void Validate() const;
};

enum class RotorSide { kLeft, kRight, kFront, kRear };

struct ModelErrorSpec {
  enum class Variant { kNone, kMassOffset, kRotorBias, kParameterRounding };

  Variant variant = Variant::kNone;
  double mass_offset = 0.0;  // kg
  double rotor_bias = 0.0;   // multiplicative fraction on rotor velocity
  RotorSide side = RotorSide::kLeft;

  static ModelErrorSpec None() { return {}; }
  static ModelErrorSpec MassOffset(double kg);
  static ModelErrorSpec RotorBias(double fraction, RotorSide side);
  static ModelErrorSpec ParameterRounding();
};

// Hover rotor velocity for the nominal rotor gains: 4 k u^2 = m g.
Action HoverControls(const VehicleParams& params);
double MaxRotorVelocity(const VehicleParams& params);

// Diagonal process noise on the velocity and angular velocity rows.
Eigen::MatrixXd DefaultProcessNoise(double variance = 1e-4);

// d/dt of the packed 13-vector for a (clamped) action.
Eigen::VectorXd StateDerivative(const Eigen::VectorXd& x, const Action& action,
                                const VehicleParams& params);

// One RK4 step with quaternion renormalization. Deterministic.
State Step(const State& state, const Action& action,
           const VehicleParams& params, double dt);

LinearDynamics Linearize(const State& state, const Action& action,
                         const VehicleParams& params, double dt,
                         const Eigen::MatrixXd& noise);

// Parameters of the true plant under the given model error.
VehicleParams ApplyModelError(const VehicleParams& params,
                              const ModelErrorSpec& spec);

double RoundToOneSignificantDigit(double value);

class QuadrotorModel : public SystemModel {
 public:
  QuadrotorModel(VehicleParams params, double dt, Eigen::MatrixXd noise);
  QuadrotorModel(VehicleParams params, double dt)
      : QuadrotorModel(params, dt, DefaultProcessNoise()) {}

  int state_dim() const override { return kStateDim; }
  int tangent_dim() const override { return kTangentDim; }
  int action_dim() const override { return kActionDim; }

  Eigen::VectorXd Step(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) const override;
  Eigen::VectorXd Retract(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& delta) const override;
  Eigen::VectorXd Difference(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& reference) const override;
  Eigen::MatrixXd ProcessNoise() const override { return noise_; }

  const VehicleParams& params() const { return params_; }
  double dt() const { return dt_; }

 private:
  VehicleParams params_;
  double dt_;
  Eigen::MatrixXd noise_;
};

}  // namespace mpcgps

#endif  // MPCGPS_DYNAMICS_H_
