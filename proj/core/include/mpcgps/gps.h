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

#ifndef MPCGPS_GPS_H_
#define MPCGPS_GPS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mpcgps/cost.h"
#include "mpcgps/duals.h"
#include "mpcgps/dynamics.h"
#include "mpcgps/environment.h"
#include "mpcgps/mpc.h"
#include "mpcgps/policy.h"
#include "mpcgps/trajopt.h"

namespace mpcgps {

enum class TrainingVariant {
  kOfflineOnly,   // rollouts with the offline linear-Gaussian controller
  kMpcTrueCost,   // MPC on the task cost plus policy and dual terms
  kMpcSurrogate,  // MPC on the surrogate cost
};

const char* TrainingVariantName(TrainingVariant variant);
TrainingVariant ParseTrainingVariant(const std::string& name);

struct DualOptions {
  double lambda_step = 1e-3;
  double lambda_bound = 1e3;  // elementwise clip
  double kl_target = 1.0;     // nats
  double nu_min = 1e-4;
  double nu_max = 1e4;
  double initial_nu = 0.1;    // value assigned after the first iteration
};

struct GpsConfig {
  int iterations = 3;               // K
  int num_initial_states = 2;       // N
  int samples_per_state = 2;        // M
  int horizon = 100;                // T
  std::string scenario = "straight_hallway";
  std::uint64_t scenario_seed = 0;
  TrainingVariant variant = TrainingVariant::kMpcSurrogate;
  ModelErrorSpec model_error;

  VehicleParams vehicle;
  double dt = 0.05;
  double plant_noise_variance = 1e-4;  // true plant, velocity rows
  double model_noise_variance = 1e-4;  // planning model
  TaskTargets targets;                 // hover is filled from the vehicle if zero
  CostWeights weights;
  SensorConfig sensor;
  CrashConfig crash;

  ILQGOptions offline;
  MpcOptions mpc;
  TrainOptions train;
  PolicyFitOptions fit;
  DualOptions duals;
  double initial_jitter = 0.05;  // m
  std::uint64_t seed = 0;
  int threads = 0;               // 0 = hardware concurrency

  void Validate() const;
};

struct IterationReport {
  int iteration = 0;
  int rollouts = 0;
  int crashes = 0;
  int fallbacks = 0;
  int samples = 0;
  double mean_task_cost = 0.0;
  double offline_cost = 0.0;     // mean over initial states
  double initial_policy_loss = 0.0;
  double policy_loss = 0.0;
  double mean_kl = 0.0;          // KL(p~ || pi) per visited step
  double mean_nu = 0.0;
  double min_nu = 0.0;
  double max_nu = 0.0;
  double mean_abs_lambda = 0.0;
};

struct IterationArtifacts {
  const IterationReport& report;
  const std::vector<RolloutRecord>& rollouts;
  const PolicyNet& policy;
  const std::vector<DualState>& duals;
};

struct GpsResult {
  PolicyNet policy;
  std::vector<IterationReport> reports;
};

// Alternates offline solves, rollouts, policy training, policy fits and dual
// updates. The plant is only ever driven by the rollout controllers.
GpsResult RunGps(const GpsConfig& config,
                 const std::function<void(const IterationArtifacts&)>& on_iteration = {});

// Per-step dual update from the rollouts of one trajectory distribution:
//   lambda_t += step * nu_t * (E_pi[u_t] - E_p[u_t]),
// which raises the controller's action where the policy's is higher.
// Disabled steps (nu = 0) are enabled at options.initial_nu.
struct DualUpdateStats {
  double mean_kl = 0.0;
  int steps = 0;  // steps with samples
};
DualState UpdateDuals(const DualState& duals,
                      const std::vector<const RolloutRecord*>& rollouts,
                      const LinearizedPolicy& policy, const DualOptions& options,
                      DualUpdateStats* stats = nullptr);

// Start state i of n: level, at rest, at the target height, with Gaussian
// position jitter drawn from rng when given.
State SampleInitialState(const std::string& scenario, int i, int n,
                         double height, double jitter, std::mt19937_64* rng);

// Model, plant and cost as configured.
struct GpsSetup {
  std::shared_ptr<const Environment> env;
  std::shared_ptr<const QuadrotorModel> model;
  std::shared_ptr<const TaskCost> task;
  Plant plant;
  TaskTargets targets;
};
GpsSetup MakeSetup(const GpsConfig& config);

}  // namespace mpcgps

#endif  // MPCGPS_GPS_H_
