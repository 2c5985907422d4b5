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

#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "mpcgps/dynamics.h"
#include "test_util.h"

namespace mpcgps {
namespace {

using testing::RandomVector;

State RandomState(std::mt19937_64& rng) {
  State s;
  s.position = RandomVector(3, rng, 2.0);
  s.velocity = RandomVector(3, rng, 1.0);
  s.orientation = Eigen::Quaterniond(Eigen::Vector4d(RandomVector(4, rng))).normalized();
  s.angular_velocity = RandomVector(3, rng, 0.5);
  return s;
}

Action RandomAction(const VehicleParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 1.5);
  Action a;
  for (int i = 0; i < 4; ++i) a(i) = u(rng) * HoverControls(p)(0);
  return a;
}

// Chart written with AngleAxis so it does not share code with the library.
State Perturb(const State& s, const Eigen::VectorXd& d) {
  State out = s;
  out.position += d.segment<3>(0);
  out.velocity += d.segment<3>(3);
  const Eigen::Vector3d r = d.segment<3>(6);
  const double angle = r.norm();
  if (angle > 0.0) {
    out.orientation = s.orientation * Eigen::AngleAxisd(angle, r / angle);
  }
  out.angular_velocity += d.segment<3>(9);
  return out;
}

Eigen::VectorXd Deviation(const State& s, const State& ref) {
  Eigen::VectorXd d(12);
  d.segment<3>(0) = s.position - ref.position;
  d.segment<3>(3) = s.velocity - ref.velocity;
  const Eigen::AngleAxisd aa(ref.orientation.conjugate() * s.orientation);
  double angle = aa.angle();
  if (angle > M_PI) angle -= 2.0 * M_PI;
  d.segment<3>(6) = angle * aa.axis();
  d.segment<3>(9) = s.angular_velocity - ref.angular_velocity;
  return d;
}

double Energy(const State& s, const VehicleParams& p) {
  const Eigen::Vector3d iw = p.inertia.cwiseProduct(s.angular_velocity);
  return 0.5 * p.mass * s.velocity.squaredNorm() + p.mass * p.gravity * s.position.z() +
         0.5 * s.angular_velocity.dot(iw);
}

TEST(Dynamics, HoverControlsBalanceGravity) {
  const VehicleParams p;
  const Action u = HoverControls(p);
  EXPECT_NEAR(4.0 * p.thrust_coefficient * u(0) * u(0), p.mass * p.gravity, 1e-9);
  EXPECT_NEAR(u(0), std::sqrt(1.5 * 9.81 / 3.2e-5), 1e-9);
}

TEST(Dynamics, HoverIsAnEquilibrium) {
  const VehicleParams p;
  State s;
  s.position = {1.0, -2.0, 3.0};
  State next = s;
  for (int i = 0; i < 100; ++i) next = Step(next, HoverControls(p), p, 0.05);
  EXPECT_LT((next.position - s.position).norm(), 1e-9);
  EXPECT_LT(next.velocity.norm(), 1e-9);
  EXPECT_LT(next.angular_velocity.norm(), 1e-9);
}

TEST(Dynamics, FreeFallWithoutDrag) {
  VehicleParams p;
  p.linear_drag = 0.0;
  State s;
  s.position.z() = 100.0;
  for (int i = 0; i < 20; ++i) s = Step(s, Action::Zero(), p, 0.05);
  EXPECT_NEAR(s.position.z(), 100.0 - 0.5 * 9.81 * 1.0, 1e-9);
  EXPECT_NEAR(s.velocity.z(), -9.81, 1e-9);
}

TEST(Dynamics, EnergyConservedWithoutThrustOrDrag) {
  VehicleParams p;
  p.linear_drag = 0.0;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    State s = RandomState(rng);
    s.position.z() += 50.0;
    const double e0 = Energy(s, p);
    for (int i = 0; i < 20; ++i) s = Step(s, Action::Zero(), p, 0.05);
    EXPECT_NEAR(Energy(s, p), e0, 1e-3 * std::abs(e0));
  }
}

TEST(Dynamics, QuaternionStaysNormalized) {
  const VehicleParams p;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const State s = Step(RandomState(rng), RandomAction(p, rng), p, 0.05);
    EXPECT_NEAR(s.orientation.norm(), 1.0, 1e-12);
  }
}

TEST(Dynamics, ActionsAreClamped) {
  const VehicleParams p;
  const State s;
  const State a = Step(s, Action::Constant(-500.0), p, 0.05);
  const State b = Step(s, Action::Zero(), p, 0.05);
  EXPECT_EQ(a.ToVector(), b.ToVector());
  const State c = Step(s, Action::Constant(1e6), p, 0.05);
  const State d = Step(s, Action::Constant(MaxRotorVelocity(p)), p, 0.05);
  EXPECT_EQ(c.ToVector(), d.ToVector());
}

TEST(Dynamics, LeftRotorBiasRollsRight) {
  const VehicleParams p = ApplyModelError(VehicleParams{}, ModelErrorSpec::RotorBias(0.08, RotorSide::kLeft));
  const State s = Step(State{}, HoverControls(VehicleParams{}), p, 0.05);
  EXPECT_GT(s.angular_velocity.x(), 0.0);
  EXPECT_NEAR(s.angular_velocity.y(), 0.0, 1e-12);
  EXPECT_GT(s.velocity.z(), 0.0);
}

TEST(Dynamics, YawTorqueFromSpinDirections) {
  const VehicleParams p;
  const double h = HoverControls(p)(0);
  const State s = Step(State{}, Action(1.1 * h, 0.9 * h, 1.1 * h, 0.9 * h), p, 0.05);
  EXPECT_GT(s.angular_velocity.z(), 0.0);
  EXPECT_NEAR(s.angular_velocity.x(), 0.0, 1e-12);
  EXPECT_NEAR(s.angular_velocity.y(), 0.0, 1e-12);
}

TEST(Dynamics, LinearizationMatchesFiniteDifferences) {
  const VehicleParams p;
  const double dt = 0.05;
  const QuadrotorModel model(p, dt);
  std::mt19937_64 rng(11);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const State s = RandomState(rng);
    const Action u = RandomAction(p, rng);
    const LinearDynamics lin = model.Linearize(s.ToVector(), u);
    const State image = Step(s, u, p, dt);

    Eigen::MatrixXd fx(12, 12), fu(12, 4);
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(12);
      d(i) = h;
      const Eigen::VectorXd plus = Deviation(Step(Perturb(s, d), u, p, dt), image);
      d(i) = -h;
      const Eigen::VectorXd minus = Deviation(Step(Perturb(s, d), u, p, dt), image);
      fx.col(i) = (plus - minus) / (2.0 * h);
    }
    for (int i = 0; i < 4; ++i) {
      Action a = u, b = u;
      a(i) += h;
      b(i) -= h;
      fu.col(i) = (Deviation(Step(s, a, p, dt), image) - Deviation(Step(s, b, p, dt), image)) /
                  (2.0 * h);
    }
    EXPECT_LT(testing::RelativeError(lin.fx, fx), 1e-4) << "trial " << trial;
    EXPECT_LT(testing::RelativeError(lin.fu, fu), 1e-4) << "trial " << trial;
    EXPECT_LT(lin.fc.norm(), 1e-12);
  }
}

TEST(Dynamics, LinearizationAgainstOtherChartHasOffset) {
  const VehicleParams p;
  const QuadrotorModel model(p, 0.05);
  const Eigen::VectorXd x = State{}.ToVector();
  const Eigen::VectorXd u = HoverControls(p);
  Eigen::VectorXd chart = x;
  chart(0) += 0.25;
  const LinearDynamics lin = model.Linearize(x, u, &chart);
  EXPECT_NEAR(lin.fc(0), -0.25, 1e-12);
  EXPECT_LT(lin.fc.tail(11).norm(), 1e-12);
}

TEST(Dynamics, RetractDifferenceRoundTrip) {
  const QuadrotorModel model(VehicleParams{}, 0.05);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = RandomState(rng).ToVector();
    const Eigen::VectorXd d = RandomVector(12, rng, 0.3);
    EXPECT_LT((model.Difference(model.Retract(x, d), x) - d).norm(), 1e-10);
    EXPECT_LT((Deviation(State::FromVector(model.Retract(x, d)), State::FromVector(x)) - d).norm(),
              1e-10);
  }
}

TEST(ModelError, NoneIsIdentityAndInputUnchanged) {
  const VehicleParams p;
  const VehicleParams copy = p;
  const VehicleParams out = ApplyModelError(p, ModelErrorSpec::None());
  EXPECT_EQ(out.mass, p.mass);
  EXPECT_EQ(out.inertia, p.inertia);
  EXPECT_EQ(out.rotor_gains, p.rotor_gains);
  EXPECT_EQ(out.thrust_coefficient, p.thrust_coefficient);
  ApplyModelError(p, ModelErrorSpec::RotorBias(0.08, RotorSide::kLeft));
  EXPECT_EQ(p.rotor_gains, copy.rotor_gains);
}

TEST(ModelError, MassOffset) {
  const VehicleParams out = ApplyModelError(VehicleParams{}, ModelErrorSpec::MassOffset(0.05));
  EXPECT_DOUBLE_EQ(out.mass, 1.55);
  EXPECT_THROW(ApplyModelError(VehicleParams{}, ModelErrorSpec::MassOffset(-2.0)),
               ValidationError);
}

TEST(ModelError, RotorBiasScalesOneSide) {
  const VehicleParams out =
      ApplyModelError(VehicleParams{}, ModelErrorSpec::RotorBias(0.08, RotorSide::kLeft));
  EXPECT_DOUBLE_EQ(out.rotor_gains(0), 1.08);
  EXPECT_DOUBLE_EQ(out.rotor_gains(1), 1.08);
  EXPECT_DOUBLE_EQ(out.rotor_gains(2), 1.0);
  EXPECT_DOUBLE_EQ(out.rotor_gains(3), 1.0);
  EXPECT_THROW(ApplyModelError(VehicleParams{}, ModelErrorSpec::RotorBias(1.5, RotorSide::kLeft)),
               ValidationError);
}

TEST(ModelError, RoundingToOneSignificantDigit) {
  EXPECT_DOUBLE_EQ(RoundToOneSignificantDigit(0.0123), 0.01);
  EXPECT_DOUBLE_EQ(RoundToOneSignificantDigit(0.029), 0.03);
  EXPECT_DOUBLE_EQ(RoundToOneSignificantDigit(0.22), 0.2);
  EXPECT_DOUBLE_EQ(RoundToOneSignificantDigit(-370.0), -400.0);
  EXPECT_EQ(RoundToOneSignificantDigit(0.0), 0.0);

  const VehicleParams out = ApplyModelError(VehicleParams{}, ModelErrorSpec::ParameterRounding());
  EXPECT_DOUBLE_EQ(out.arm_length, 0.2);
  EXPECT_DOUBLE_EQ(out.inertia.z(), 0.06);
  EXPECT_DOUBLE_EQ(out.mass, 1.5);
}

TEST(ModelError, InvalidParamsRejected) {
  VehicleParams p;
  p.mass = 0.0;
  EXPECT_THROW(p.Validate(), ValidationError);
  p = VehicleParams{};
  p.rotor_gains(2) = -1.0;
  EXPECT_THROW(p.Validate(), ValidationError);
}

TEST(LinearModel, StepAndLinearize) {
  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 1.0, 0.1, 0.0, 1.0;
  b << 0.0, 0.1;
  const LinearModel model(a, b);
  const Eigen::VectorXd x = Eigen::Vector2d(1.0, 2.0);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 3.0);
  EXPECT_LT((model.Step(x, u) - Eigen::Vector2d(1.2, 2.3)).norm(), 1e-15);
  const LinearDynamics lin = model.Linearize(x, u, nullptr);
  EXPECT_EQ(lin.fx, a);
  EXPECT_EQ(lin.fu, b);
  EXPECT_THROW(LinearModel(a, Eigen::MatrixXd(3, 1)), ValidationError);
}

}  // namespace
}  // namespace mpcgps
