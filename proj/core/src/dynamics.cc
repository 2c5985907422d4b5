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

#include "mpcgps/dynamics.h"

#include <cmath>
#include <utility>

namespace mpcgps {
namespace {

constexpr double kRotorAngles[4] = {M_PI / 4, 3 * M_PI / 4, 5 * M_PI / 4,
                                    7 * M_PI / 4};
constexpr double kSpin[4] = {1.0, -1.0, 1.0, -1.0};

void CheckFinite(const Eigen::VectorXd& x) {
  static const char* kNames[] = {"position", "velocity", "orientation",
                                 "angular_velocity"};
  static const int kStart[] = {0, 3, 6, 10};
  static const int kSize[] = {3, 3, 4, 3};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < kSize[c]; ++i) {
      if (!std::isfinite(x(kStart[c] + i))) {
        throw SimulationDivergence(kNames[c], i);
      }
    }
  }
}

Action Clamp(const Action& action, const VehicleParams& params) {
  return action.cwiseMax(0.0).cwiseMin(MaxRotorVelocity(params));
}

}  // namespace

// ----- generic models ----- //

LinearDynamics SystemModel::Linearize(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u,
                                      const Eigen::VectorXd* next_chart) const {
  const int n = tangent_dim();
  const int m = action_dim();
  const double h = finite_difference_step;
  const Eigen::VectorXd image = Step(x, u);
  const Eigen::VectorXd& chart = next_chart ? *next_chart : image;

  LinearDynamics lin;
  lin.fx.resize(n, n);
  lin.fu.resize(n, m);
  lin.fc = Difference(image, chart);
  lin.noise = ProcessNoise();

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    delta(i) = h;
    const Eigen::VectorXd plus = Difference(Step(Retract(x, delta), u), chart);
    delta(i) = -h;
    const Eigen::VectorXd minus = Difference(Step(Retract(x, delta), u), chart);
    delta(i) = 0.0;
    lin.fx.col(i) = (plus - minus) / (2.0 * h);
  }
  Eigen::VectorXd du = u;
  for (int i = 0; i < m; ++i) {
    du(i) = u(i) + h;
    const Eigen::VectorXd plus = Difference(Step(x, du), chart);
    du(i) = u(i) - h;
    const Eigen::VectorXd minus = Difference(Step(x, du), chart);
    du(i) = u(i);
    lin.fu.col(i) = (plus - minus) / (2.0 * h);
  }
  return lin;
}

LinearModel::LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b,
                         Eigen::VectorXd c, Eigen::MatrixXd noise)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)),
      noise_(std::move(noise)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() ||
      c_.size() != a_.rows() || noise_.rows() != a_.rows() ||
      noise_.cols() != a_.rows()) {
    throw ValidationError("LinearModel: inconsistent dimensions");
  }
}

LinearModel::LinearModel(Eigen::MatrixXd a, Eigen::MatrixXd b)
    : LinearModel(a, b, Eigen::VectorXd::Zero(a.rows()),
                  Eigen::MatrixXd::Zero(a.rows(), a.rows())) {}

Eigen::VectorXd LinearModel::Step(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) const {
  Eigen::VectorXd next = a_ * x + b_ * u + c_;
  for (int i = 0; i < next.size(); ++i) {
    if (!std::isfinite(next(i))) throw SimulationDivergence("state", i);
  }
  return next;
}

LinearDynamics LinearModel::Linearize(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u,
                                      const Eigen::VectorXd* next_chart) const {
  LinearDynamics lin;
  lin.fx = a_;
  lin.fu = b_;
  lin.fc = next_chart ? Eigen::VectorXd(Step(x, u) - *next_chart)
                      : Eigen::VectorXd::Zero(a_.rows());
  lin.noise = noise_;
  return lin;
}

// ----- quadrotor ----- //

void VehicleParams::Validate() const {
  if (!(mass > 0.0)) throw ValidationError("vehicle mass must be positive");
  if (!(inertia.minCoeff() > 0.0)) {
    throw ValidationError("vehicle inertia components must be positive");
  }
  if (!(thrust_coefficient > 0.0)) {
    throw ValidationError("thrust coefficient must be positive");
  }
  if (!(rotor_gains.minCoeff() > 0.0)) {
    throw ValidationError("rotor gains must be positive");
  }
  if (!(arm_length > 0.0)) throw ValidationError("arm length must be positive");
  if (torque_coefficient < 0.0 || linear_drag < 0.0 || gravity < 0.0) {
    throw ValidationError("torque, drag and gravity must be non-negative");
  }
}

ModelErrorSpec ModelErrorSpec::MassOffset(double kg) {
  ModelErrorSpec spec;
  spec.variant = Variant::kMassOffset;
  spec.mass_offset = kg;
  return spec;
}

ModelErrorSpec ModelErrorSpec::RotorBias(double fraction, RotorSide side) {
  ModelErrorSpec spec;
  spec.variant = Variant::kRotorBias;
  spec.rotor_bias = fraction;
  spec.side = side;
  return spec;
}

ModelErrorSpec ModelErrorSpec::ParameterRounding() {
  ModelErrorSpec spec;
  spec.variant = Variant::kParameterRounding;
  return spec;
}

Action HoverControls(const VehicleParams& params) {
  params.Validate();
  const double u = std::sqrt(params.mass * params.gravity /
                             (4.0 * params.thrust_coefficient));
  return Action::Constant(u);
}

double MaxRotorVelocity(const VehicleParams& params) {
  if (params.max_rotor_velocity > 0.0) return params.max_rotor_velocity;
  return 2.0 * 1.5 * std::sqrt(params.mass * params.gravity /
                               (4.0 * params.thrust_coefficient));
}

Eigen::MatrixXd DefaultProcessNoise(double variance) {
  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(kTangentDim, kTangentDim);
  noise.block<3, 3>(3, 3).diagonal().setConstant(variance);
  noise.block<3, 3>(9, 9).diagonal().setConstant(variance);
  return noise;
}

Eigen::VectorXd StateDerivative(const Eigen::VectorXd& x, const Action& action,
                                const VehicleParams& p) {
  const Eigen::Vector3d v = x.segment<3>(3);
  const Eigen::Quaterniond q(x(6), x(7), x(8), x(9));
  const Eigen::Vector3d w = x.segment<3>(10);

  double total_thrust = 0.0;
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  for (int i = 0; i < 4; ++i) {
    const double rotor = p.rotor_gains(i) * action(i);
    const double thrust = p.thrust_coefficient * rotor * rotor;
    const double rx = p.arm_length * std::cos(kRotorAngles[i]);
    const double ry = p.arm_length * std::sin(kRotorAngles[i]);
    total_thrust += thrust;
    torque.x() += ry * thrust;
    torque.y() -= rx * thrust;
    torque.z() += kSpin[i] * p.torque_coefficient * rotor * rotor;
  }

  Eigen::VectorXd dx(kStateDim);
  dx.segment<3>(0) = v;
  const Eigen::Matrix3d rotation = q.normalized().toRotationMatrix();
  dx.segment<3>(3) = rotation * Eigen::Vector3d(0.0, 0.0, total_thrust / p.mass) -
                     Eigen::Vector3d(0.0, 0.0, p.gravity) -
                     (p.linear_drag / p.mass) * v;
  // q_dot = 0.5 q * (0, w)
  dx(6) = -0.5 * q.vec().dot(w);
  dx.segment<3>(7) = 0.5 * (q.w() * w + q.vec().cross(w));
  const Eigen::Vector3d iw = p.inertia.cwiseProduct(w);
  dx.segment<3>(10) = (torque - w.cross(iw)).cwiseQuotient(p.inertia);
  return dx;
}

State Step(const State& state, const Action& action,
           const VehicleParams& params, double dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const Action u = Clamp(action, params);
  const Eigen::VectorXd x = state.ToVector();
  const Eigen::VectorXd k1 = StateDerivative(x, u, params);
  const Eigen::VectorXd k2 = StateDerivative(x + 0.5 * dt * k1, u, params);
  const Eigen::VectorXd k3 = StateDerivative(x + 0.5 * dt * k2, u, params);
  const Eigen::VectorXd k4 = StateDerivative(x + dt * k3, u, params);
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  CheckFinite(next);
  const double norm = next.segment<4>(6).norm();
  if (!(norm > 0.0)) throw SimulationDivergence("orientation", 0);
  next.segment<4>(6) /= norm;
  return State::FromVector(next);
}

LinearDynamics Linearize(const State& state, const Action& action,
                         const VehicleParams& params, double dt,
                         const Eigen::MatrixXd& noise) {
  const QuadrotorModel model(params, dt, noise);
  return model.Linearize(state.ToVector(), action);
}

double RoundToOneSignificantDigit(double value) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double magnitude = std::pow(10.0, std::floor(std::log10(std::abs(value))));
  return std::round(value / magnitude) * magnitude;
}

VehicleParams ApplyModelError(const VehicleParams& params,
                              const ModelErrorSpec& spec) {
  params.Validate();
  VehicleParams out = params;
  switch (spec.variant) {
    case ModelErrorSpec::Variant::kNone:
      break;
    case ModelErrorSpec::Variant::kMassOffset:
      if (!std::isfinite(spec.mass_offset) ||
          !(params.mass + spec.mass_offset > 0.0)) {
        throw ValidationError("mass offset must leave a positive mass");
      }
      out.mass += spec.mass_offset;
      break;
    case ModelErrorSpec::Variant::kRotorBias: {
      if (!(spec.rotor_bias > -1.0 && spec.rotor_bias < 1.0)) {
        throw ValidationError("rotor bias fraction must lie in (-1, 1)");
      }
      int rotors[2];
      switch (spec.side) {
        case RotorSide::kLeft: rotors[0] = 0; rotors[1] = 1; break;
        case RotorSide::kRight: rotors[0] = 2; rotors[1] = 3; break;
        case RotorSide::kFront: rotors[0] = 0; rotors[1] = 3; break;
        case RotorSide::kRear: rotors[0] = 1; rotors[1] = 2; break;
      }
      for (int r : rotors) out.rotor_gains(r) *= 1.0 + spec.rotor_bias;
      break;
    }
    case ModelErrorSpec::Variant::kParameterRounding:
      // mass and gravity are measured, not identified; they stay exact
      for (int i = 0; i < 3; ++i) {
        out.inertia(i) = RoundToOneSignificantDigit(params.inertia(i));
      }
      out.arm_length = RoundToOneSignificantDigit(params.arm_length);
      out.thrust_coefficient =
          RoundToOneSignificantDigit(params.thrust_coefficient);
      out.torque_coefficient =
          RoundToOneSignificantDigit(params.torque_coefficient);
      out.linear_drag = RoundToOneSignificantDigit(params.linear_drag);
      break;
  }
  out.Validate();
  return out;
}

// ----- QuadrotorModel ----- //

QuadrotorModel::QuadrotorModel(VehicleParams params, double dt,
                               Eigen::MatrixXd noise)
    : params_(std::move(params)), dt_(dt), noise_(std::move(noise)) {
  params_.Validate();
  if (!(dt_ > 0.0)) throw ValidationError("time step must be positive");
  if (noise_.rows() != kTangentDim || noise_.cols() != kTangentDim) {
    throw ValidationError("process noise must be 12 x 12");
  }
}

Eigen::VectorXd QuadrotorModel::Step(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
  return mpcgps::Step(State::FromVector(x), Action(u), params_, dt_).ToVector();
}

Eigen::VectorXd QuadrotorModel::Retract(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& delta) const {
  return RetractVector(x, delta);
}

Eigen::VectorXd QuadrotorModel::Difference(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& reference) const {
  return DifferenceVector(x, reference);
}

}  // namespace mpcgps
