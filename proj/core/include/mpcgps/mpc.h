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

#ifndef MPCGPS_MPC_H_
#define MPCGPS_MPC_H_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpcgps/cost.h"
#include "mpcgps/duals.h"
#include "mpcgps/dynamics.h"
#include "mpcgps/environment.h"
#include "mpcgps/linearized_policy.h"
#include "mpcgps/trajopt.h"

namespace mpcgps {

// State marginals of the reference closed loop over absolute steps
// t+1..t+H_eff, H_eff = min(H, T - t), seeded with a point mass at x_t. Each
// marginal is expressed around the reference nominal state of its step.
// Linearizations stored in the reference are used when present.
std::vector<GaussianMarginal> PropagateMarginals(
    const LinGaussController& reference, const SystemModel& model,
    const Eigen::VectorXd& x_t, int t, int horizon);

enum class MpcObjective {
  kSurrogate,  // marginal log density + policy and dual terms
  kTrueCost,   // task cost + policy and dual terms
};

struct MpcOptions {
  int horizon = 15;
  int iterations = 3;
  bool deterministic = false;
  double covariance_regularization = 1e-6;
  ILQGOptions solver;
};

// Everything an MPC step needs besides the current state. Pointers may be
// null: a null policy or duals disables those terms.
struct MpcProblem {
  std::shared_ptr<const LinGaussController> reference;
  std::shared_ptr<const SystemModel> model;
  const LinearizedPolicy* policy = nullptr;
  const DualState* duals = nullptr;
  MpcObjective objective = MpcObjective::kSurrogate;
  std::shared_ptr<const CostFunction> task;  // required for kTrueCost
};

struct MpcStepResult {
  // first-step local controller around the planned state x_hat_0 = x_t
  Eigen::MatrixXd gain;
  Eigen::VectorXd feedforward;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd mean_action;  // u_hat_0 + k_0
  Eigen::VectorXd action;       // executed
  Trajectory predicted;
  bool fallback = false;
  std::string failure;
  int solver_iterations = 0;

  Eigen::MatrixXd Precision() const;
};

// Task cost and the policy/dual terms over a window starting at absolute
// step start_time: l(x,u) - nu log pi(u|x) - u' lambda.
class TrueCostWindow : public CostFunction {
 public:
  TrueCostWindow(std::shared_ptr<const CostFunction> task,
                 const LinearizedPolicy* policy, const DualState* duals,
                 int start_time);

  double Running(int k, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;
  QuadExpansion QuadratizeRunning(int k, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u,
                                  const SystemModel& model) const override;

 private:
  std::shared_ptr<const CostFunction> task_;
  const LinearizedPolicy* policy_;
  const DualState* duals_;
  int start_time_;
};

// One receding-horizon solve from x_t at absolute step t. warm_start, when
// given, is the previous step's plan and is shifted by one step. On solver
// failure the reference controller's mean action is used. The returned plan
// is the new warm start.
MpcStepResult MpcStep(const Eigen::VectorXd& x_t, int t,
                      const MpcProblem& problem, const MpcOptions& options,
                      const LinGaussController* warm_start,
                      std::mt19937_64* rng, LinGaussController* plan);

// ----- closed-loop rollouts ----- //

// The true system: its parameters may differ from the planning model.
struct Plant {
  VehicleParams params;
  double dt = 0.05;
  Eigen::MatrixXd process_noise = DefaultProcessNoise();
  std::shared_ptr<const Environment> env;
  SensorConfig sensor;
  CrashConfig crash;
};

// One step of the true plant: clamped action in, noisy next state out.
Eigen::VectorXd PlantStep(const Plant& plant, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& action, std::mt19937_64& rng);
Eigen::VectorXd ClampAction(const Plant& plant, const Eigen::VectorXd& action);

struct RolloutStep {
  Eigen::VectorXd state;
  ObservationVector observation;
  Eigen::VectorXd action;
  MpcStepResult decision;
};

struct RolloutRecord {
  int trajectory_index = 0;
  int sample_index = 0;
  std::vector<RolloutStep> steps;
  Eigen::VectorXd final_state;
  CrashStatus status = CrashStatus::kFlying;
  bool diverged = false;
  std::string failure;
  int fallback_count = 0;
  double task_cost = 0.0;

  bool crashed() const { return status != CrashStatus::kFlying || diverged; }
  int length() const { return static_cast<int>(steps.size()); }
};

// Source of actions for a closed-loop rollout.
class ActionSource {
 public:
  virtual ~ActionSource() = default;
  virtual MpcStepResult Decide(int t, const Eigen::VectorXd& x,
                               std::mt19937_64* rng) = 0;
};

class MpcController : public ActionSource {
 public:
  MpcController(MpcProblem problem, MpcOptions options);
  MpcStepResult Decide(int t, const Eigen::VectorXd& x,
                       std::mt19937_64* rng) override;

 private:
  MpcProblem problem_;
  MpcOptions options_;
  LinGaussController plan_;
  bool has_plan_ = false;
};

// Executes a linear-Gaussian controller directly.
class LinGaussActor : public ActionSource {
 public:
  LinGaussActor(std::shared_ptr<const LinGaussController> controller,
                std::shared_ptr<const SystemModel> model, bool deterministic);
  MpcStepResult Decide(int t, const Eigen::VectorXd& x,
                       std::mt19937_64* rng) override;

 private:
  std::shared_ptr<const LinGaussController> controller_;
  std::shared_ptr<const SystemModel> model_;
  bool deterministic_;
};

// Runs up to T steps on the plant, stopping at the first crash. Process noise
// is added in the tangent chart after each step. Failures are recorded.
RolloutRecord Rollout(const Plant& plant, ActionSource& source,
                      const Eigen::VectorXd& x0, int horizon,
                      std::mt19937_64& rng, const CostFunction* task_cost);

RolloutRecord MpcRollout(const Plant& plant, const MpcProblem& problem,
                         const MpcOptions& options, const Eigen::VectorXd& x0,
                         int horizon, std::mt19937_64& rng,
                         const CostFunction* task_cost);

}  // namespace mpcgps

#endif  // MPCGPS_MPC_H_
